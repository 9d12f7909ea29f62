"""Live typing state machine.

A prediction must repeat for N consecutive frames (the confidence bound,
default 10) before it is acted on; after an emission the session locks
until the hand leaves the frame, so one held sign types exactly one
character. Delete pops the last buffered character; "nothing" behaves
like an absent hand.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .landmarks import DEL_INDEX, NOTHING_INDEX, SPACE_INDEX, label_token

KIND_LETTER = "letter"
KIND_SPACE = "space"
KIND_DELETE = "delete"


@dataclass(frozen=True)
class SessionConfig:
    confidence_bound: int = 10

    def __post_init__(self):
        if self.confidence_bound < 1:
            raise ValueError(
                f"confidence bound must be >= 1, got {self.confidence_bound}"
            )


@dataclass(frozen=True)
class Emission:
    kind: str
    char: str | None
    buffer: str  # snapshot after the emission applied


@dataclass(frozen=True)
class Session:
    config: SessionConfig
    buffer: str = ""
    run_label: int | None = None
    run_count: int = 0
    locked: bool = False
    transcript: tuple[Emission, ...] = ()


def new_session(config: SessionConfig | None = None) -> Session:
    return Session(config=config or SessionConfig())


def step(session: Session, prediction: int | None) -> tuple[Session, Emission | None]:
    """Advance one frame. prediction is a label index, or None for no hand.

    Pure: returns the successor session and the emission, if any. A no-hand
    frame (or the "nothing" class, which is detector noise at runtime)
    resets the run and re-arms the session without touching the buffer.
    """
    if prediction is None or prediction == NOTHING_INDEX:
        return (
            replace(session, run_label=None, run_count=0, locked=False),
            None,
        )
    if session.locked:
        return session, None

    count = session.run_count + 1 if prediction == session.run_label else 1
    if count < session.config.confidence_bound:
        return replace(session, run_label=prediction, run_count=count), None

    # Threshold reached: emit once and lock until the hand leaves the frame.
    if prediction == DEL_INDEX:
        emission = Emission(KIND_DELETE, None, session.buffer[:-1])
    elif prediction == SPACE_INDEX:
        emission = Emission(KIND_SPACE, None, session.buffer + " ")
    else:
        char = label_token(prediction)
        emission = Emission(KIND_LETTER, char, session.buffer + char)
    successor = replace(
        session,
        buffer=emission.buffer,
        run_label=prediction,
        run_count=count,
        locked=True,
        transcript=session.transcript + (emission,),
    )
    return successor, emission


def fold_transcript(transcript) -> str:
    """Rebuild a buffer by replaying emissions over an empty string."""
    buffer = ""
    for emission in transcript:
        if emission.kind == KIND_LETTER:
            buffer += emission.char
        elif emission.kind == KIND_SPACE:
            buffer += " "
        elif emission.kind == KIND_DELETE:
            buffer = buffer[:-1]
        else:
            raise ValueError(f"unknown emission kind {emission.kind!r}")
    return buffer
