"""Newline-delimited wire protocol, stream replay, and the serving loop.

Clients send one JSON object per line: frames carry a strictly increasing
seq plus either 63 landmark values and a hand flag or nulls for both (no
hand). Every frame is answered with an ack (predicted label, run progress,
lock state); threshold crossings additionally produce an emit; an end
message or end-of-stream produces a final with the accumulated buffer.
Recorded streams are just these frame lines in a file, so live sessions
replay bit-identically.
"""

from __future__ import annotations

import json
import math
import socketserver
import sys
from dataclasses import dataclass

import numpy as np

from .landmarks import LandmarkFrame, Observation, featurize, label_token
from .neuralnet import Model, forward
from .typing_session import Emission, SessionConfig, new_session, step

LANDMARK_VALUES = 63


class ProtocolError(Exception):
    """Any violation of the wire format."""


class MalformedLineError(ProtocolError):
    pass


class LandmarkLengthError(ProtocolError):
    pass


class SeqRegressionError(ProtocolError):
    pass


class NullPairingError(ProtocolError):
    pass


@dataclass(frozen=True)
class FrameMessage:
    seq: int
    observation: Observation


_END = object()  # internal marker for {"type":"end"}


def _is_strict_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _decode_any(line: str, prev_seq: int | None):
    """Parse one client line into a FrameMessage, or _END for an end message."""
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, RecursionError):
        raise MalformedLineError("line is not valid JSON") from None
    if not isinstance(obj, dict):
        raise MalformedLineError("expected a JSON object")
    kind = obj.get("type")
    if kind == "end":
        return _END
    if kind != "frame":
        raise MalformedLineError(f"unexpected message type {kind!r}")

    seq = obj.get("seq")
    if not _is_strict_int(seq) or seq < 0:
        raise MalformedLineError(f"seq must be an unsigned integer, got {seq!r}")
    if prev_seq is not None and seq <= prev_seq:
        raise SeqRegressionError(f"seq {seq} does not advance past {prev_seq}")

    hand = obj.get("hand")
    lm = obj.get("lm")
    if (hand is None) != (lm is None):
        raise NullPairingError("hand and lm must be null together or set together")
    if hand is None:
        return FrameMessage(seq=seq, observation=None)

    if not _is_strict_int(hand) or hand not in (0, 1):
        raise MalformedLineError(f"hand must be 0 or 1, got {hand!r}")
    if not isinstance(lm, list):
        raise MalformedLineError("lm must be an array of 63 numbers")
    if len(lm) != LANDMARK_VALUES:
        raise LandmarkLengthError(f"lm must hold 63 values, got {len(lm)}")
    values = []
    for v in lm:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise MalformedLineError(f"non-finite or non-numeric landmark value {v!r}")
        values.append(float(v))
    joints = tuple((values[3 * i], values[3 * i + 1], values[3 * i + 2]) for i in range(21))
    return FrameMessage(seq=seq, observation=LandmarkFrame(joints=joints, handedness=hand))


def decode_frame(line: str, prev_seq: int | None = None) -> FrameMessage:
    """Decode one frame line; end messages are not frames and are rejected."""
    decoded = _decode_any(line, prev_seq)
    if decoded is _END:
        raise MalformedLineError("end message where a frame was expected")
    return decoded


def encode_frame(seq: int, observation: Observation) -> str:
    """Inverse of decode_frame; used to record fixture streams."""
    if observation is None:
        return json.dumps(
            {"type": "frame", "seq": seq, "hand": None, "lm": None},
            separators=(",", ":"),
        )
    lm = [value for joint in observation.joints for value in joint]
    return json.dumps(
        {"type": "frame", "seq": seq, "hand": observation.handedness, "lm": lm},
        separators=(",", ":"),
    )


def ack_line(seq: int, predicted: str | None, run_count: int, locked: bool) -> str:
    return json.dumps(
        {"type": "ack", "seq": seq, "pred": predicted, "run_count": run_count, "locked": locked},
        separators=(",", ":"),
    )


def emit_line(seq: int, emission: Emission) -> str:
    return json.dumps(
        {"type": "emit", "seq": seq, "action": emission.kind, "char": emission.char, "buffer": emission.buffer},
        separators=(",", ":"),
    )


def final_line(buffer: str) -> str:
    return json.dumps({"type": "final", "buffer": buffer}, separators=(",", ":"))


def error_line(message: str) -> str:
    return json.dumps({"type": "error", "error": message}, separators=(",", ":"))


class SessionPipeline:
    """One client stream: decode, classify, step the session, encode events."""

    def __init__(self, model: Model, config: SessionConfig | None = None):
        self.model = model
        self.config = config or SessionConfig()
        self.session = new_session(self.config)
        self.prev_seq: int | None = None
        self.emissions: list[Emission] = []

    def handle_line(self, line: str) -> list[str] | None:
        """Responses for one raw line, or None when the line was an end message."""
        decoded = _decode_any(line, self.prev_seq)
        if decoded is _END:
            return None
        return self.handle_frame(decoded)

    def handle_frame(self, message: FrameMessage) -> list[str]:
        self.prev_seq = message.seq
        if message.observation is None:
            predicted = None
        else:
            probs, _ = forward(self.model, featurize(message.observation))
            predicted = int(np.argmax(probs))
        self.session, emission = step(self.session, predicted)
        token = label_token(predicted) if predicted is not None else None
        responses = [ack_line(message.seq, token, self.session.run_count, self.session.locked)]
        if emission is not None:
            self.emissions.append(emission)
            responses.append(emit_line(message.seq, emission))
        return responses

    def final(self) -> str:
        return final_line(self.session.buffer)


@dataclass
class ReplayResult:
    final_buffer: str
    transcript: tuple[Emission, ...]
    event_lines: list[str]


def replay(
    model: Model,
    stream_path,
    config: SessionConfig | None = None,
    events_out=None,
) -> ReplayResult:
    """Drive a recorded stream file through the full pipeline.

    Writes every response line to events_out (when given) and returns the
    final buffer plus the emission transcript. Deterministic.
    """
    pipeline = SessionPipeline(model, config)
    lines: list[str] = []

    def push(response: str):
        lines.append(response)
        if events_out is not None:
            events_out.write(response + "\n")

    with open(stream_path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            try:
                responses = pipeline.handle_line(line)
            except ProtocolError as exc:
                raise type(exc)(f"{stream_path}:{line_no}: {exc}") from None
            if responses is None:  # recorded end message
                break
            for response in responses:
                push(response)
    push(pipeline.final())
    return ReplayResult(
        final_buffer=pipeline.session.buffer,
        transcript=pipeline.session.transcript,
        event_lines=lines,
    )


class _StreamHandler(socketserver.StreamRequestHandler):
    def handle(self):
        server: TypingServer = self.server  # type: ignore[assignment]
        pipeline = SessionPipeline(server.model, server.session_config)
        finalized = False
        try:
            for raw in self.rfile:
                line = raw.decode("utf-8", errors="replace").rstrip("\r\n")
                if not line:
                    continue
                try:
                    responses = pipeline.handle_line(line)
                except ProtocolError as exc:
                    self._send(error_line(str(exc)))
                    return  # drop this client; the server keeps accepting
                if responses is None:
                    self._send(pipeline.final())
                    finalized = True
                    # fresh session in case the client starts another stream
                    pipeline = SessionPipeline(server.model, server.session_config)
                    continue
                finalized = False
                for response in responses:
                    self._send(response)
            if not finalized:
                self._send(pipeline.final())
        except (BrokenPipeError, ConnectionResetError):
            pass

    def _send(self, line: str):
        self.wfile.write((line + "\n").encode("utf-8"))


class TypingServer(socketserver.TCPServer):
    """Sequential TCP server: one typing session per client connection."""

    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], model: Model, config: SessionConfig | None = None):
        self.model = model
        self.session_config = config or SessionConfig()
        super().__init__(address, _StreamHandler)


def serve_stdio(model: Model, config: SessionConfig | None = None, stdin=None, stdout=None) -> int:
    """Serve exactly one session over text streams; returns an exit status."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    pipeline = SessionPipeline(model, config)

    def send(line: str):
        stdout.write(line + "\n")
        stdout.flush()

    finalized = False
    for raw in stdin:
        line = raw.rstrip("\r\n")
        if not line:
            continue
        try:
            responses = pipeline.handle_line(line)
        except ProtocolError as exc:
            send(error_line(str(exc)))
            return 1
        if responses is None:
            send(pipeline.final())
            finalized = True
            pipeline = SessionPipeline(model, config)
            continue
        finalized = False
        for response in responses:
            send(response)
    if not finalized:
        send(pipeline.final())
    return 0


def parse_endpoint(endpoint: str) -> tuple[str, int] | None:
    """Map 'stdio' to None, otherwise 'host:port' to an address tuple."""
    if endpoint == "stdio":
        return None
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint must be 'stdio' or 'host:port', got {endpoint!r}")
    return (host or "127.0.0.1", int(port))


def serve(model: Model, endpoint: str, config: SessionConfig | None = None):
    """Run until interrupted: stdio for a single session, TCP for many."""
    address = parse_endpoint(endpoint)
    if address is None:
        serve_stdio(model, config)
        return
    with TypingServer(address, model, config) as server:
        server.serve_forever()
