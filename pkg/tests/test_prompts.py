"""Prompt assembly, asset manifest integrity, and the response-style linter."""
from __future__ import annotations

import pytest

from srassist.context import (BlockBudgets, BlockTag, ContextStore, Feature,
                              MISSING_BLOCK_MARKER)
from srassist.errors import SlotBundleMismatch
from srassist.gateway import ImagePart, TextPart, count_tokens
from srassist.prompts import (MOUSE_ONLY, PromptAssembler, SystemInstruction,
                              TEMPLATE_SLOTS, TOO_LONG, VISUAL_ONLY,
                              asset_checksum, load_prompt_manifest,
                              validate_response_style)
from tests.conftest import make_desktop

from srassist.platform_sim import capture_environment


@pytest.fixture(scope="module")
def assembler() -> PromptAssembler:
    return PromptAssembler()


def seeded_store() -> ContextStore:
    store = ContextStore()
    state, shot = capture_environment(make_desktop())
    store.set_environment(state, shot)
    return store


# -- system instruction ---------------------------------------------------------

def test_system_instruction_shape():
    instruction = SystemInstruction.load()
    assert len(instruction.principles) == 4
    assert len(instruction.uncertainty_rules) == 2
    assert instruction.version
    joined = " ".join(instruction.principles).lower()
    assert "keyboard" in joined
    assert "visual" in joined


def test_manifest_checksums_match_assets():
    manifest = load_prompt_manifest()
    assert manifest["templates"]
    for name, expected in manifest["templates"].items():
        assert asset_checksum(name) == expected


# -- rendering --------------------------------------------------------------------

def test_render_contextual_qa_fills_every_slot(assembler):
    store = seeded_store()
    bundle = store.build_bundle(Feature.CONTEXTUAL_QA,
                                question="How do I use the agent mode?",
                                kb_hits_text="### App — Docs\ncontent")
    prompt = assembler.render("contextual_qa", bundle,
                              question="How do I use the agent mode?")
    text = prompt.serialized_text()
    assert "How do I use the agent mode?" in text
    assert "app: TestApp" in text  # screen state
    assert "### App — Docs" in text  # retrieved docs
    assert prompt.image_count() == 1
    assert prompt.system == assembler.system.text
    # no unfilled placeholders survive
    for slot in TEMPLATE_SLOTS["contextual_qa"]:
        assert "{" + slot + "}" not in text


def test_render_adaptive_includes_trace_and_stalled(assembler):
    from srassist.context import SRTraceEvent, TraceKind
    from srassist.guidance import Step
    from srassist.context import ChatTurn

    store = seeded_store()
    store.append_trace_event(SRTraceEvent(at=1, kind=TraceKind.GESTURE,
                                          payload="control+shift+i"))
    store.push_chat_turn(ChatTurn(
        turn_id=1, question="q", answer="a",
        steps=[Step(1, "first"), Step(2, "second"), Step(3, "third")],
        feature=Feature.CONTEXTUAL_QA, at=0))
    store.set_stalled_step(1, 3)
    bundle = store.build_bundle(Feature.ADAPTIVE_SUPPORT)
    text = assembler.render("adaptive_support", bundle).serialized_text()
    assert "GESTURE: control+shift+i" in text
    assert "step 3: third" in text


def test_render_screen_description_minimal_slots(assembler):
    bundle = seeded_store().build_bundle(Feature.SCREEN_DESCRIPTION)
    prompt = assembler.render("screen_description", bundle)
    text = prompt.serialized_text()
    assert "app: TestApp" in text
    assert "Retrieved documentation" not in text
    assert "Conversation so far" not in text
    assert prompt.image_count() == 1


def test_render_missing_screenshot_becomes_marker(assembler):
    bundle = ContextStore().build_bundle(Feature.SCREEN_DESCRIPTION)
    prompt = assembler.render("screen_description", bundle)
    assert prompt.image_count() == 0
    assert MISSING_BLOCK_MARKER in prompt.serialized_text()


def test_render_is_byte_stable(assembler):
    store = seeded_store()
    bundle = store.build_bundle(Feature.CONTEXTUAL_QA, question="q?",
                                kb_hits_text="docs")
    first = assembler.render("contextual_qa", bundle, question="q?")
    second = assembler.render("contextual_qa", bundle, question="q?")
    assert first.serialized_text() == second.serialized_text()
    assert first.token_estimate == second.token_estimate


def test_render_question_presence_rules(assembler):
    store = seeded_store()
    qa_bundle = store.build_bundle(Feature.CONTEXTUAL_QA, question="q?",
                                   kb_hits_text=None)
    with pytest.raises(SlotBundleMismatch):
        assembler.render("contextual_qa", qa_bundle)  # question required
    sd_bundle = store.build_bundle(Feature.SCREEN_DESCRIPTION)
    with pytest.raises(SlotBundleMismatch):
        assembler.render("screen_description", sd_bundle, question="q?")


def test_render_rejects_feature_mismatch(assembler):
    bundle = seeded_store().build_bundle(Feature.SCREEN_DESCRIPTION)
    with pytest.raises(SlotBundleMismatch):
        assembler.render("adaptive_support", bundle)


def test_render_consumes_every_block_exactly_once(assembler):
    store = seeded_store()
    sentinel = "UNIQUEDOCSSENTINEL"
    bundle = store.build_bundle(Feature.CONTEXTUAL_QA, question="q?",
                                kb_hits_text=sentinel)
    text = assembler.render("contextual_qa", bundle,
                            question="q?").serialized_text()
    assert text.count(sentinel) == 1
    state_line = "app: TestApp"
    assert text.count(state_line) == 1


def test_token_estimate_respects_budgets(assembler):
    budgets = BlockBudgets(screen_state=8, sr_trace=8, retrieved_docs=8,
                           chat_history=8, stalled_step=8)
    store = ContextStore(budgets=budgets)
    state, shot = capture_environment(make_desktop())
    store.set_environment(state, shot)
    long_docs = " ".join(f"word{i}" for i in range(500))
    bundle = store.build_bundle(Feature.CONTEXTUAL_QA, question="short q",
                                kb_hits_text=long_docs)
    prompt = assembler.render("contextual_qa", bundle, question="short q")
    template_overhead = count_tokens(assembler.system.text) + count_tokens(
        assembler.templates["contextual_qa"].body)
    budget_sum = 8 * 4 + count_tokens("short q") + 4  # + marker allowance
    assert prompt.token_estimate <= template_overhead + budget_sum


# -- style linter ---------------------------------------------------------------

def test_linter_keyboard_guidance_passes():
    text = "Press Alt+N, then N, then U to open the Page Number menu"
    assert validate_response_style(text) == []


def test_linter_flags_mouse_and_visual():
    codes = [v.code for v in validate_response_style("Click the blue icon")]
    assert codes == [MOUSE_ONLY, VISUAL_ONLY]


def test_linter_empty_text_passes():
    assert validate_response_style("") == []


def test_linter_mouse_with_keyboard_alternative_passes():
    text = "Click OK or press Enter to confirm the dialog"
    assert all(v.code != MOUSE_ONLY for v in validate_response_style(text))


def test_linter_position_with_element_name_passes():
    text = 'Move to the "Page Number" button near the bottom left'
    assert all(v.code != VISUAL_ONLY for v in validate_response_style(text))


def test_linter_flags_overlong_sentence():
    text = "press " + "and then press tab again to move forward " * 5
    assert any(v.code == TOO_LONG for v in validate_response_style(text))
