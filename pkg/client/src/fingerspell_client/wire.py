"""Client side of the newline-delimited wire protocol."""

from __future__ import annotations

import json

from .detectors import DetectedHand


class WireError(Exception):
    """Server sent something the client cannot interpret."""


def frame_message(seq: int, detected: DetectedHand | None) -> str:
    """Encode one frame; a missed detection is sent as nulls, never dropped,
    so the server can re-arm the session."""
    if detected is None:
        payload = {"type": "frame", "seq": seq, "hand": None, "lm": None}
    else:
        lm = [float(v) for joint in detected.joints for v in joint]
        payload = {"type": "frame", "seq": seq, "hand": detected.handedness, "lm": lm}
    return json.dumps(payload, separators=(",", ":"))


def end_message() -> str:
    return '{"type":"end"}'


def parse_event(line: str) -> dict:
    """Parse a server response line (ack / emit / final / error)."""
    try:
        event = json.loads(line)
    except json.JSONDecodeError:
        raise WireError(f"unparseable server line: {line!r}") from None
    if not isinstance(event, dict) or event.get("type") not in ("ack", "emit", "final", "error"):
        raise WireError(f"unexpected server message: {line!r}")
    return event


class SequenceCounter:
    """Strictly increasing frame sequence numbers."""

    def __init__(self):
        self._next = 0

    def take(self) -> int:
        seq = self._next
        self._next += 1
        return seq
