"""Hand-landmark domain types, the label vocabulary, and featurization.

A detector observation is 21 hand joints in (x, y, z) plus a binary
handedness flag. Featurization flattens that into the 64-value input
vector the classifier consumes: x0,y0,z0 ... x20,y20,z20, handedness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NUM_JOINTS = 21
FEATURE_DIM = 64

# Canonical vocabulary: the 26 letters, then the specials in lexicographic
# order. Index order is load-bearing: model files and CSVs depend on it.
LABELS: tuple[str, ...] = tuple(chr(ord("A") + i) for i in range(26)) + (
    "del",
    "nothing",
    "space",
)
NUM_CLASSES = len(LABELS)

DEL_INDEX = 26
NOTHING_INDEX = 27
SPACE_INDEX = 28

_LABEL_TO_INDEX = {token: index for index, token in enumerate(LABELS)}

# Dataset CSV header: label, hand, then 21 interleaved coordinate triples.
DATASET_HEADER = "label,hand," + ",".join(
    f"{axis}{joint}" for joint in range(NUM_JOINTS) for axis in ("x", "y", "z")
)


class UnknownLabelError(ValueError):
    """A label token outside the 29-entry vocabulary."""

    def __init__(self, token: str):
        super().__init__(f"unknown label token: {token!r}")
        self.token = token


class InvalidFrameError(ValueError):
    """A landmark frame violating the 21-joint / finite / binary-hand rules."""


def parse_label(token: str) -> int:
    """Map a vocabulary token (case-sensitive) to its canonical index."""
    try:
        return _LABEL_TO_INDEX[token]
    except KeyError:
        raise UnknownLabelError(token) from None


def label_token(index: int) -> str:
    """Inverse of parse_label."""
    if not 0 <= index < NUM_CLASSES:
        raise UnknownLabelError(str(index))
    return LABELS[index]


@dataclass(frozen=True)
class LandmarkFrame:
    """One detector observation: 21 joints as (x, y, z) triples plus handedness.

    x and y are image-normalized coordinates (nominally in [0, 1] but the
    detector may exceed that for partially visible hands), z is relative
    depth. handedness is 0 for a left hand, 1 for a right hand. Invariants
    are enforced at construction; a LandmarkFrame that exists is valid.
    """

    joints: tuple[tuple[float, float, float], ...]
    handedness: int

    def __post_init__(self):
        if len(self.joints) != NUM_JOINTS:
            raise InvalidFrameError(
                f"expected {NUM_JOINTS} joints, got {len(self.joints)}"
            )
        for i, joint in enumerate(self.joints):
            if len(joint) != 3:
                raise InvalidFrameError(f"joint {i} is not an (x, y, z) triple")
            for value in joint:
                if not math.isfinite(value):
                    raise InvalidFrameError(f"non-finite coordinate in joint {i}")
        if self.handedness not in (0, 1):
            raise InvalidFrameError(
                f"handedness must be 0 or 1, got {self.handedness!r}"
            )


# An observation is either a detected hand or None when the detector saw
# no hand in the frame.
Observation = LandmarkFrame | None


def featurize(frame: LandmarkFrame) -> np.ndarray:
    """Flatten a frame into the 64-value input vector.

    Order is x0,y0,z0 ... x20,y20,z20 with handedness last. Pure; returns
    a fresh float64 array of length 64.
    """
    out = np.empty(FEATURE_DIM, dtype=np.float64)
    flat = out[:63].reshape(NUM_JOINTS, 3)
    for i, (x, y, z) in enumerate(frame.joints):
        flat[i, 0] = x
        flat[i, 1] = y
        flat[i, 2] = z
    out[63] = float(frame.handedness)
    return out


def hflip(frame: LandmarkFrame) -> LandmarkFrame:
    """Mirror a frame horizontally: x becomes 1 - x, handedness toggles.

    This is the landmark-space equivalent of flipping the source image
    before detection; y and z are unchanged.
    """
    mirrored = tuple((1.0 - x, y, z) for x, y, z in frame.joints)
    return LandmarkFrame(joints=mirrored, handedness=1 - frame.handedness)
