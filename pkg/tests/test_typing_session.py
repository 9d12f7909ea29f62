import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fingerspell.landmarks import DEL_INDEX, NOTHING_INDEX, SPACE_INDEX, parse_label
from fingerspell.typing_session import (
    Emission,
    Session,
    SessionConfig,
    fold_transcript,
    new_session,
    step,
)

A = parse_label("A")
B = parse_label("B")
NOHAND = None


def run(session: Session, predictions) -> tuple[Session, list[Emission]]:
    emissions = []
    for pred in predictions:
        session, emission = step(session, pred)
        if emission is not None:
            emissions.append(emission)
    return session, emissions


class TestNewSession:
    def test_defaults(self):
        session = new_session()
        assert session.config.confidence_bound == 10
        assert session.buffer == ""
        assert session.run_count == 0
        assert not session.locked
        assert session.transcript == ()

    def test_bound_one_emits_immediately(self):
        session = new_session(SessionConfig(confidence_bound=1))
        session, emission = step(session, A)
        assert emission is not None and session.buffer == "A"

    def test_bound_zero_rejected(self):
        with pytest.raises(ValueError):
            SessionConfig(confidence_bound=0)


class TestStep:
    def test_ten_consecutive_frames_type_one_letter(self):
        session, emissions = run(new_session(), [A] * 10)
        assert len(emissions) == 1
        assert session.buffer == "A"
        assert session.locked

    def test_interrupted_runs_do_not_emit(self):
        session, emissions = run(new_session(), [A] * 9 + [B] + [A] * 9)
        assert emissions == []
        assert session.buffer == ""

    def test_delete_removes_one_character(self):
        primed = Session(config=SessionConfig(), buffer="AB")
        session, emissions = run(primed, [DEL_INDEX] * 10)
        assert len(emissions) == 1
        assert emissions[0].kind == "delete"
        assert session.buffer == "A"

    def test_delete_on_empty_buffer_is_recorded_noop(self):
        session, emissions = run(new_session(), [DEL_INDEX] * 10)
        assert len(emissions) == 1
        assert session.buffer == ""
        assert len(session.transcript) == 1

    def test_locked_until_hand_leaves_frame(self):
        session, emissions = run(new_session(), [A] * 110)
        assert len(emissions) == 1 and session.buffer == "A"
        session, emissions = run(session, [NOHAND] + [A] * 10)
        assert len(emissions) == 1
        assert session.buffer == "AA"

    def test_lock_blocks_different_letters_too(self):
        session, _ = run(new_session(), [A] * 10)
        session, emissions = run(session, [B] * 50)
        assert emissions == [] and session.buffer == "A"

    def test_space_appends_space_character(self):
        session, _ = run(new_session(), [A] * 10 + [NOHAND] + [SPACE_INDEX] * 10)
        assert session.buffer == "A "

    def test_nothing_class_behaves_like_no_hand(self):
        base = new_session(SessionConfig(confidence_bound=3))
        via_nothing, _ = run(base, [A, A, NOTHING_INDEX, A, A, A])
        via_nohand, _ = run(base, [A, A, NOHAND, A, A, A])
        assert via_nothing.buffer == via_nohand.buffer == "A"
        assert via_nothing == via_nohand

    def test_mismatch_restarts_count_at_one(self):
        cfg = SessionConfig(confidence_bound=3)
        session, emissions = run(new_session(cfg), [A, A, B, B])
        assert emissions == []
        assert session.run_label == B and session.run_count == 2

    def test_run_count_resets_on_no_hand(self):
        session, _ = run(new_session(), [A] * 5 + [NOHAND])
        assert session.run_count == 0 and session.run_label is None


INPUTS = (A, B, DEL_INDEX, NOHAND)


def check_trace_invariants(predictions, bound=3):
    """Assert the state machine invariants along one input trace."""
    config = SessionConfig(confidence_bound=bound)
    session = new_session(config)
    emissions_since_arm = 0
    for pred in predictions:
        before = session
        session, emission = step(session, pred)
        # determinism: same (state, input) gives the same result
        again, emission2 = step(before, pred)
        assert again == session and emission2 == emission

        assert session.run_count <= bound
        if pred is None or pred == NOTHING_INDEX:
            emissions_since_arm = 0
            assert not session.locked and emission is None
        if emission is not None:
            emissions_since_arm += 1
            assert session.locked
        assert emissions_since_arm <= 1  # at most one emission per arm
    assert session.buffer == fold_transcript(session.transcript)
    return session


def test_exhaustive_traces_up_to_length_6():
    for length in range(7):
        for predictions in itertools.product(INPUTS, repeat=length):
            check_trace_invariants(predictions)


@given(st.lists(st.sampled_from(INPUTS), max_size=40))
def test_random_long_traces(predictions):
    check_trace_invariants(predictions)


@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=15))
def test_threshold_exactness(bound, k):
    # k identical predictions from a fresh arm: one emission iff k >= bound
    session, emissions = run(new_session(SessionConfig(bound)), [A] * k)
    assert len(emissions) == (1 if k >= bound else 0)
    if k >= bound:
        assert session.buffer == "A"


def test_transcript_replay_reproduces_emissions():
    trace = [A] * 10 + [NOHAND] + [B] * 10 + [NOHAND] + [DEL_INDEX] * 10
    a_session, a_emissions = run(new_session(), trace)
    b_session, b_emissions = run(new_session(), trace)
    assert a_session == b_session
    assert a_emissions == b_emissions
    assert a_session.buffer == "A"
