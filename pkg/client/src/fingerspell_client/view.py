"""UI state driven exclusively by server responses.

The renderer never computes predictions; it draws whatever the last ack,
emit, or final said. Emissions set a flash timestamp so the typed
character can be highlighted briefly on screen.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, replace

from .wire import parse_event

FLASH_SECONDS = 0.6


@dataclass(frozen=True)
class ViewState:
    predicted: str | None = None
    run_count: int = 0
    locked: bool = False
    buffer: str = ""
    flash_char: str | None = None
    flash_at: float = 0.0
    final_buffer: str | None = None
    error: str | None = None

    def flash_active(self, now: float) -> bool:
        return self.flash_char is not None and now - self.flash_at < FLASH_SECONDS


class ClientView:
    """Thread-safe view fed by the reader thread, rendered by the UI loop."""

    def __init__(self, clock=time.monotonic):
        self._clock = clock
        self._lock = threading.Lock()
        self._state = ViewState()

    def apply(self, line: str) -> None:
        event = parse_event(line)
        with self._lock:
            self._state = self._next_state(self._state, event)

    def apply_error(self, message: str) -> None:
        with self._lock:
            self._state = replace(self._state, error=message)

    def _next_state(self, state: ViewState, event: dict) -> ViewState:
        kind = event["type"]
        if kind == "ack":
            return replace(
                state,
                predicted=event.get("pred"),
                run_count=int(event.get("run_count", 0)),
                locked=bool(event.get("locked", False)),
            )
        if kind == "emit":
            shown = event.get("char") or (" " if event.get("action") == "space" else "⌫")
            return replace(
                state,
                buffer=event.get("buffer", state.buffer),
                flash_char=shown,
                flash_at=self._clock(),
            )
        if kind == "final":
            return replace(state, final_buffer=event.get("buffer", ""))
        return replace(state, error=str(event.get("error", "server error")))

    def snapshot(self) -> ViewState:
        with self._lock:
            return self._state
