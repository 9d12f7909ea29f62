"""Constants of the server's external interface, restated client-side.

The client talks to the core package only over its published formats, so
the vocabulary, CSV header, and message shapes are declared here rather
than imported.
"""

from __future__ import annotations

NUM_JOINTS = 21

LABEL_TOKENS: tuple[str, ...] = tuple(chr(ord("A") + i) for i in range(26)) + (
    "del",
    "nothing",
    "space",
)

DATASET_HEADER = "label,hand," + ",".join(
    f"{axis}{joint}" for joint in range(NUM_JOINTS) for axis in ("x", "y", "z")
)
