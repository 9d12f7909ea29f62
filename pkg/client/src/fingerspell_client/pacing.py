"""Frame pacing: capture at camera rate, send at the configured rate.

Dropping rather than queueing keeps the confidence bound's real-time
meaning roughly stable regardless of camera frame rate.
"""

from __future__ import annotations

import time


class FramePacer:
    def __init__(self, target_fps: float, clock=time.monotonic):
        if target_fps < 1:
            raise ValueError(f"target frame rate must be >= 1, got {target_fps}")
        self._interval = 1.0 / target_fps
        self._clock = clock
        self._next_due = None

    def should_send(self) -> bool:
        """True when the next capture is due to be forwarded to the server."""
        now = self._clock()
        if self._next_due is None or now >= self._next_due:
            self._next_due = now + self._interval
            return True
        return False
