"""Live webcam typing loop.

Captures frames, runs the hand detector, streams every observation to the
server (missed detections included, so the session can re-arm), and
renders the preview with landmark overlay, the current prediction, run
progress toward the confidence bound, the lock indicator, and the
accumulated buffer. Press q to end the stream and show the final text.
"""

from __future__ import annotations

import socket
import threading
from dataclasses import dataclass

import cv2

from .detectors import DetectedHand, HandDetector, MediaPipeDetector
from .pacing import FramePacer
from .view import ClientView, ViewState
from .wire import SequenceCounter, WireError, end_message, frame_message

HUD_COLOR = (80, 220, 80)
LOCK_COLOR = (60, 60, 230)
FLASH_COLOR = (40, 200, 255)


@dataclass(frozen=True)
class ClientConfig:
    server: str = "127.0.0.1:9571"
    camera_index: int = 0
    target_fps: float = 15.0
    mirror_preview: bool = True  # signers expect a mirror; coordinates stay unmirrored

    def __post_init__(self):
        if self.target_fps < 1:
            raise ValueError(f"target frame rate must be >= 1, got {self.target_fps}")

    def address(self) -> tuple[str, int]:
        host, sep, port = self.server.rpartition(":")
        if not sep or not port.isdigit():
            raise ValueError(f"server must be host:port, got {self.server!r}")
        return (host or "127.0.0.1", int(port))


class ServerConnection:
    """Line-oriented socket wrapper with a background reader feeding a view."""

    def __init__(self, address: tuple[str, int], view: ClientView):
        self._sock = socket.create_connection(address, timeout=10)
        self._stream = self._sock.makefile("rw", encoding="utf-8", newline="\n")
        self._view = view
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def send(self, line: str) -> None:
        self._stream.write(line + "\n")
        self._stream.flush()

    def _read_loop(self) -> None:
        try:
            for raw in self._stream:
                self._view.apply(raw.rstrip("\n"))
        except (OSError, WireError) as exc:
            self._view.apply_error(str(exc))

    def finish(self, timeout: float = 5.0) -> None:
        try:
            self.send(end_message())
        except OSError:
            pass
        self._reader.join(timeout=timeout)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


def draw_overlay(frame, detected: DetectedHand | None, state: ViewState, mirrored: bool, now: float):
    """Render HUD and landmarks onto the preview frame (in place)."""
    height, width = frame.shape[:2]
    if detected is not None:
        for x, y, _ in detected.joints:
            px = int(((1.0 - x) if mirrored else x) * width)
            py = int(y * height)
            cv2.circle(frame, (px, py), 3, HUD_COLOR, -1)

    if state.locked:
        cv2.putText(frame, "LOCKED - remove hand", (10, 30),
                    cv2.FONT_HERSHEY_SIMPLEX, 0.7, LOCK_COLOR, 2)
    elif state.predicted:
        cv2.putText(frame, f"{state.predicted}  {state.run_count}", (10, 30),
                    cv2.FONT_HERSHEY_SIMPLEX, 0.8, HUD_COLOR, 2)
    cv2.putText(frame, state.buffer[-40:], (10, height - 15),
                cv2.FONT_HERSHEY_SIMPLEX, 0.8, HUD_COLOR, 2)
    if state.flash_active(now):
        cv2.putText(frame, state.flash_char, (width // 2 - 30, height // 2),
                    cv2.FONT_HERSHEY_SIMPLEX, 3.0, FLASH_COLOR, 6)
    if state.error:
        cv2.putText(frame, f"connection error: {state.error}"[:60], (10, 60),
                    cv2.FONT_HERSHEY_SIMPLEX, 0.6, LOCK_COLOR, 2)
    return frame


def run_live(config: ClientConfig, detector: HandDetector | None = None) -> str:
    """Run the loop until q is pressed; returns the final buffer."""
    import time

    if detector is None:
        detector = MediaPipeDetector(static_images=False)
    capture = cv2.VideoCapture(config.camera_index)
    if not capture.isOpened():
        raise SystemExit(f"cannot open camera {config.camera_index}")

    view = ClientView()
    connection = ServerConnection(config.address(), view)
    pacer = FramePacer(config.target_fps)
    seq = SequenceCounter()
    try:
        while True:
            ok, frame = capture.read()
            if not ok:
                raise SystemExit("camera stopped delivering frames")
            detected = detector.detect(frame)
            if pacer.should_send():
                connection.send(frame_message(seq.take(), detected))
            state = view.snapshot()
            if state.error:
                draw_overlay(frame, detected, state, False, time.monotonic())
                cv2.imshow("fingerspell", frame)
                cv2.waitKey(1500)
                raise SystemExit(f"server connection lost: {state.error}")
            preview = cv2.flip(frame, 1) if config.mirror_preview else frame
            draw_overlay(preview, detected, state, config.mirror_preview, time.monotonic())
            cv2.imshow("fingerspell", preview)
            if cv2.waitKey(1) & 0xFF == ord("q"):
                break
    finally:
        capture.release()

    connection.finish()
    final = view.snapshot().final_buffer or view.snapshot().buffer
    connection.close()
    print(f"final: {final!r}")
    cv2.destroyAllWindows()
    return final
