"""Trace buffer, truncation, bundle assembly, history, and stalled step."""
from __future__ import annotations

import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srassist.context import (Block, BlockBudgets, BlockTag, ChatTurn,
                              ContextStore, FEATURE_BLOCKS, Feature,
                              MISSING_BLOCK_MARKER, NO_STALLED_STEP_MARKER,
                              SRTraceEvent, TraceBuffer, TraceKind,
                              TRUNCATION_MARKER, trace_to_text,
                              truncate_block)
from srassist.errors import (MissingRequiredInput, StepOutOfRange,
                             UnknownTurn)
from srassist.gateway import count_tokens
from srassist.guidance import Step
from srassist.platform_sim import capture_environment
from tests.conftest import make_desktop, make_frame, make_state


def gesture(at: int, payload: str = "tab") -> SRTraceEvent:
    return SRTraceEvent(at=at, kind=TraceKind.GESTURE, payload=payload)


def speech(at: int, payload: str = "OK button") -> SRTraceEvent:
    return SRTraceEvent(at=at, kind=TraceKind.SPEECH, payload=payload)


def make_turn(turn_id: int, n_steps: int = 2) -> ChatTurn:
    return ChatTurn(turn_id=turn_id, question=f"q{turn_id}",
                    answer=f"a{turn_id}",
                    steps=[Step(index=i + 1, text=f"step {i + 1}")
                           for i in range(n_steps)],
                    feature=Feature.CONTEXTUAL_QA, at=turn_id * 1000)


# -- trace buffer -------------------------------------------------------------

def test_trace_append_and_order():
    buf = TraceBuffer(capacity=10)
    buf.append(speech(1, "Working"))
    buf.append(gesture(2, "tab"))
    events = buf.recent(2)
    assert [e.payload for e in events] == ["Working", "tab"]


def test_trace_ring_eviction():
    buf = TraceBuffer(capacity=2)
    for at in (1, 2, 3):
        buf.append(gesture(at, f"e{at}"))
    assert [e.payload for e in buf.recent(5)] == ["e2", "e3"]


def test_recent_trace_windows():
    buf = TraceBuffer(capacity=10)
    assert buf.recent(5) == []
    for at in (1, 2, 3):
        buf.append(gesture(at))
    assert len(buf.recent(2)) == 2
    assert buf.recent(0) == []
    with pytest.raises(ValueError):
        buf.recent(-1)


def test_trace_rejects_time_regression():
    buf = TraceBuffer(capacity=10)
    buf.append(gesture(100))
    with pytest.raises(ValueError):
        buf.append(gesture(50))


def test_trace_event_requires_payload():
    with pytest.raises(ValueError):
        SRTraceEvent(at=0, kind=TraceKind.GESTURE, payload="")


@given(st.lists(st.integers(min_value=0, max_value=10_000), max_size=60),
       st.integers(min_value=1, max_value=20))
@settings(max_examples=60)
def test_trace_ring_property(ats, capacity):
    """Buffer always equals the last `capacity` events in input order."""
    ats = sorted(ats)
    buf = TraceBuffer(capacity=capacity)
    events = [gesture(at, f"p{i}") for i, at in enumerate(ats)]
    for event in events:
        buf.append(event)
    assert buf.recent(len(events) + 1) == events[-capacity:]


def test_trace_concurrent_append_and_read():
    buf = TraceBuffer(capacity=500)

    def produce():
        for i in range(400):
            buf.append(gesture(i, f"p{i}"))

    thread = threading.Thread(target=produce)
    thread.start()
    for _ in range(200):
        snapshot = buf.recent(500)
        ats = [e.at for e in snapshot]
        assert ats == sorted(ats)
    thread.join()
    assert len(buf.recent(500)) == 400


def test_trace_to_text_format():
    text = trace_to_text([gesture(0, "control+shift+i"),
                          speech(1500, "Working")])
    lines = text.splitlines()
    assert lines[0] == "[1970-01-01T00:00:00.000+00:00] GESTURE: control+shift+i"
    assert lines[1] == "[1970-01-01T00:00:01.500+00:00] SPEECH: Working"


# -- truncation ---------------------------------------------------------------

def test_truncate_under_budget_is_identity():
    text = "one two three four five"
    out, cut = truncate_block(text, 10, "keep_head")
    assert out == text and not cut


def test_truncate_keep_tail_fixture():
    text = " ".join(f"w{i}" for i in range(20))
    out, cut = truncate_block(text, 5, "keep_tail")
    assert cut
    assert out == f"{TRUNCATION_MARKER} w15 w16 w17 w18 w19"
    assert count_tokens(out) == 5 + count_tokens(TRUNCATION_MARKER)


def test_truncate_keep_head_fixture():
    text = " ".join(f"w{i}" for i in range(20))
    out, cut = truncate_block(text, 3, "keep_head")
    assert cut
    assert out == f"w0 w1 w2 {TRUNCATION_MARKER}"


def test_truncate_budget_zero_marker_only():
    out, cut = truncate_block("some words here", 0, "keep_tail")
    assert out == TRUNCATION_MARKER and cut


def test_truncate_rejects_bad_inputs():
    with pytest.raises(ValueError):
        truncate_block("x", -1, "keep_head")
    with pytest.raises(ValueError):
        truncate_block("x", 1, "keep_middle")


@given(st.text(alphabet="ab c\nd", max_size=200),
       st.integers(min_value=0, max_value=50),
       st.sampled_from(["keep_head", "keep_tail"]))
@settings(max_examples=200)
def test_truncation_safety_property(text, budget, policy):
    out, cut = truncate_block(text, budget, policy)
    assert count_tokens(out) <= budget + count_tokens(TRUNCATION_MARKER)
    assert cut == (out != text)
    if not cut:
        assert out == text


# -- bundle assembly -----------------------------------------------------------

def fresh_store(**kwargs) -> ContextStore:
    return ContextStore(**kwargs)


def seeded_store() -> ContextStore:
    store = fresh_store()
    state, shot = capture_environment(make_desktop())
    store.set_environment(state, shot)
    store.append_trace_event(gesture(1))
    store.push_chat_turn(make_turn(1))
    return store


def test_bundle_block_sets_match_rule_table():
    store = seeded_store()
    for feature, tags in FEATURE_BLOCKS.items():
        question = "how?" if feature is Feature.CONTEXTUAL_QA else None
        bundle = store.build_bundle(feature, question=question,
                                    kb_hits_text="### docs\nbody")
        assert bundle.tags() == tags


def test_contextual_qa_requires_question():
    with pytest.raises(MissingRequiredInput):
        fresh_store().build_bundle(Feature.CONTEXTUAL_QA)


def test_contextual_qa_bundle_has_no_trace_block():
    bundle = seeded_store().build_bundle(Feature.CONTEXTUAL_QA,
                                         question="how?")
    assert len(bundle.blocks) == 4
    assert BlockTag.SR_TRACE not in bundle.tags()
    history = bundle.block(BlockTag.CHAT_HISTORY).text
    assert "q1" in history and "a1" in history


def test_screen_description_bundle_has_two_blocks():
    bundle = seeded_store().build_bundle(Feature.SCREEN_DESCRIPTION)
    assert len(bundle.blocks) == 2


def test_adaptive_bundle_stalled_markers():
    store = seeded_store()
    bundle = store.build_bundle(Feature.ADAPTIVE_SUPPORT)
    assert bundle.block(BlockTag.STALLED_STEP).text == NO_STALLED_STEP_MARKER
    store.set_stalled_step(1, 2)
    bundle = store.build_bundle(Feature.ADAPTIVE_SUPPORT)
    assert "step 2" in bundle.block(BlockTag.STALLED_STEP).text


def test_missing_environment_yields_markers():
    store = fresh_store()
    bundle = store.build_bundle(Feature.SCREEN_DESCRIPTION)
    shot = bundle.block(BlockTag.SCREENSHOT)
    state = bundle.block(BlockTag.SCREEN_STATE)
    assert shot.text == MISSING_BLOCK_MARKER and not shot.present
    assert state.text == MISSING_BLOCK_MARKER and not state.present
    assert bundle.screenshot is None


def test_bundle_applies_budgets():
    store = fresh_store(budgets=BlockBudgets(chat_history=4))
    store.push_chat_turn(ChatTurn(
        turn_id=1, question="a long question with many words",
        answer="a long answer with quite a few words too",
        steps=[], feature=Feature.CONTEXTUAL_QA, at=0))
    bundle = store.build_bundle(Feature.CONTEXTUAL_QA, question="next?")
    history = bundle.block(BlockTag.CHAT_HISTORY)
    assert history.truncated
    assert history.text.startswith(TRUNCATION_MARKER)
    assert count_tokens(history.text) <= 4 + count_tokens(TRUNCATION_MARKER)


# -- environment capture --------------------------------------------------------

def test_capture_environment_highlight_and_coherence():
    state, shot = capture_environment(make_desktop())
    assert shot.highlighted
    assert (shot.focus_rect.x, shot.focus_rect.y,
            shot.focus_rect.w, shot.focus_rect.h) == (10, 10, 50, 20)
    assert abs(state.captured_at - shot.captured_at) <= 100


def test_capture_matches_script_oracle():
    frame_state = make_state(app="Word", version="16.0",
                             name="Page Number… button", role="button")
    state, _ = capture_environment(make_desktop([make_frame(frame_state)]))
    assert state.app_name == "Word"
    assert state.app_version == "16.0"
    assert state.focus.name == "Page Number… button"


def test_screen_state_text_is_line_oriented():
    text = make_state().to_text()
    lines = text.splitlines()
    assert lines[0] == "app: TestApp"
    assert lines[1] == "version: 1.0"
    assert lines[2] == "window: Main Window"
    assert "focus.name: OK" in lines
    assert "focus.bounds: 10,10,50,20" in lines


# -- history and stalled step -----------------------------------------------------

def test_history_push_and_suffix():
    store = fresh_store()
    store.push_chat_turn(make_turn(1))
    store.push_chat_turn(make_turn(2))
    assert [t.turn_id for t in store.history(1)] == [2]
    assert [t.turn_id for t in store.history()] == [1, 2]


def test_history_enforces_turn_id_sequence():
    store = fresh_store()
    with pytest.raises(ValueError):
        store.push_chat_turn(make_turn(5))


def test_clear_history_resets_everything():
    store = fresh_store()
    store.push_chat_turn(make_turn(1))
    store.set_stalled_step(1, 2)
    store.clear_history()
    assert store.history(5) == []
    assert store.get_stalled_step() is None
    assert store.next_turn_id() == 1
    store.push_chat_turn(make_turn(1))  # ids restart at 1


def test_stalled_step_set_get_last_write_wins():
    store = fresh_store()
    assert store.get_stalled_step() is None
    store.push_chat_turn(make_turn(1, n_steps=3))
    store.set_stalled_step(1, 2)
    stalled = store.get_stalled_step()
    assert (stalled.turn_id, stalled.step_index) == (1, 2)
    store.set_stalled_step(1, 3)
    assert store.get_stalled_step().step_index == 3


def test_stalled_step_validation():
    store = fresh_store()
    store.push_chat_turn(make_turn(1, n_steps=2))
    with pytest.raises(UnknownTurn):
        store.set_stalled_step(9, 1)
    with pytest.raises(StepOutOfRange):
        store.set_stalled_step(1, 3)
    with pytest.raises(StepOutOfRange):
        store.set_stalled_step(1, 0)
