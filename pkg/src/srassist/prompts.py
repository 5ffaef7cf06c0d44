"""System instruction, per-feature templates, and response-style linting."""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Tuple

from .context import BlockTag, ContextBundle, Feature, MISSING_BLOCK_MARKER
from .errors import SlotBundleMismatch
from .gateway import AssembledPrompt, ImagePart, TextPart, count_tokens

_ASSET_PACKAGE = "srassist.assets.prompts"

# Slot order per template; every non-question slot maps to a bundle block tag.
TEMPLATE_SLOTS: Dict[str, Tuple[str, ...]] = {
    "contextual_qa": ("question", "screenshot", "screen_state",
                      "retrieved_docs", "chat_history"),
    "adaptive_support": ("screenshot", "screen_state", "sr_trace",
                         "chat_history", "stalled_step"),
    "screen_description": ("screenshot", "screen_state"),
}

_SLOT_TO_TAG = {
    "screenshot": BlockTag.SCREENSHOT,
    "screen_state": BlockTag.SCREEN_STATE,
    "sr_trace": BlockTag.SR_TRACE,
    "retrieved_docs": BlockTag.RETRIEVED_DOCS,
    "chat_history": BlockTag.CHAT_HISTORY,
    "stalled_step": BlockTag.STALLED_STEP,
}

_PLACEHOLDER = re.compile(r"\{(\w+)\}")


def load_prompt_asset(name: str) -> str:
    return resources.files(_ASSET_PACKAGE).joinpath(name).read_text(encoding="utf-8")


def load_prompt_manifest() -> Dict:
    return json.loads(load_prompt_asset("prompt_manifest.json"))


def asset_checksum(name: str) -> str:
    data = resources.files(_ASSET_PACKAGE).joinpath(name).read_bytes()
    return hashlib.sha256(data).hexdigest()


@dataclass
class SystemInstruction:
    principles: List[str]
    uncertainty_rules: List[str]
    version: str
    text: str

    @classmethod
    def load(cls) -> "SystemInstruction":
        text = load_prompt_asset("system_instruction.txt")
        manifest = load_prompt_manifest()
        principles = []
        uncertainty = []
        for line in text.splitlines():
            stripped = line.strip()
            if re.match(r"^\d+\.", stripped):
                principles.append(re.sub(r"^\d+\.\s*", "", stripped))
            elif stripped.startswith("- "):
                uncertainty.append(stripped[2:])
        return cls(principles=principles, uncertainty_rules=uncertainty,
                   version=manifest["version"], text=text)


@dataclass
class PromptTemplate:
    template_id: str
    slots: Tuple[str, ...]
    body: str

    @classmethod
    def load(cls, template_id: str) -> "PromptTemplate":
        body = load_prompt_asset(f"{template_id}.txt")
        return cls(template_id=template_id,
                   slots=TEMPLATE_SLOTS[template_id], body=body)


class PromptAssembler:
    """Renders context bundles into provider-agnostic prompts.

    Stateless after construction; templates are static assets so output is
    byte-identical for fixed inputs.
    """

    def __init__(self) -> None:
        self.system = SystemInstruction.load()
        self.templates = {tid: PromptTemplate.load(tid) for tid in TEMPLATE_SLOTS}

    def render(self, template_id: str, bundle: ContextBundle,
               question: Optional[str] = None) -> AssembledPrompt:
        template = self.templates[template_id]
        if bundle.feature.value != template_id:
            raise SlotBundleMismatch(
                f"bundle for {bundle.feature.value} cannot fill {template_id}")
        if (question is not None) != (template_id == Feature.CONTEXTUAL_QA.value):
            raise SlotBundleMismatch(
                "question must be present exactly for contextual_qa")
        expected_tags = {_SLOT_TO_TAG[s] for s in template.slots if s != "question"}
        if expected_tags != set(bundle.tags()):
            raise SlotBundleMismatch(
                f"bundle blocks {sorted(t.value for t in bundle.tags())} do not "
                f"match template slots {sorted(t.value for t in expected_tags)}")

        parts: List = []

        def push_text(text: str) -> None:
            if not text:
                return
            if parts and isinstance(parts[-1], TextPart):
                parts[-1] = TextPart(parts[-1].text + text)
            else:
                parts.append(TextPart(text))

        pos = 0
        for match in _PLACEHOLDER.finditer(template.body):
            push_text(template.body[pos:match.start()])
            slot = match.group(1)
            if slot == "question":
                push_text(question or "")
            elif slot == "screenshot":
                if bundle.screenshot is not None:
                    parts.append(ImagePart(ref="current-screenshot"))
                else:
                    push_text(MISSING_BLOCK_MARKER)
            else:
                push_text(bundle.block(_SLOT_TO_TAG[slot]).text)
            pos = match.end()
        push_text(template.body[pos:])

        estimate = count_tokens(self.system.text) + sum(
            count_tokens(p.text) for p in parts if isinstance(p, TextPart))
        return AssembledPrompt(system=self.system.text, user_parts=parts,
                               template_id=template_id, token_estimate=estimate)


# ---------------------------------------------------------------------------
# Response-style linting (test/eval utility, not a runtime gate)

MOUSE_ONLY = "mouse_only"
VISUAL_ONLY = "visual_only"
TOO_LONG = "too_long"

SENTENCE_WORD_CEILING = 30

_MOUSE_VERBS = {"click", "clicks", "clicked", "clicking", "drag", "drags",
                "dragged", "dragging", "double-click", "right-click"}
_KEYBOARD_HINTS = {"press", "presses", "pressing", "key", "keys", "keyboard",
                   "shortcut", "shortcuts", "tab", "enter", "alt", "ctrl",
                   "control", "shift", "arrow", "arrows", "escape", "esc",
                   "space", "spacebar", "windows", "type", "typing"}
_COLOR_WORDS = {"red", "blue", "green", "yellow", "orange", "purple", "pink",
                "gray", "grey", "white", "black"}
_POSITION_WORDS = {"left", "right", "top", "bottom", "corner", "center",
                   "middle", "upper", "lower"}


@dataclass
class StyleViolation:
    code: str
    detail: str


def _has_element_name(segment: str) -> bool:
    """Heuristic: a quoted name or a capitalized word past sentence start."""
    if re.search(r"[\"'“‘][^\"'”’]+[\"'”’]", segment):
        return True
    words = segment.split()
    for word in words[1:]:
        bare = word.strip(".,!?;:()")
        if bare[:1].isupper():
            return True
    return False


def validate_response_style(text: str) -> List[StyleViolation]:
    """Flag guidance that breaks the SR response-preference rules.

    Checks per sentence/step: mouse-only actions without a keyboard
    alternative, color/position references with no named element, and
    sentences past the length ceiling.
    """
    violations: List[StyleViolation] = []
    segments = [s.strip() for s in re.split(r"(?<=[.!?])\s+|\n+", text) if s.strip()]
    for segment in segments:
        words = {w.strip(".,!?;:()").lower() for w in segment.split()}
        if words & _MOUSE_VERBS and not (words & _KEYBOARD_HINTS):
            violations.append(StyleViolation(MOUSE_ONLY, segment))
        if (words & _COLOR_WORDS or words & _POSITION_WORDS) \
                and not _has_element_name(segment):
            violations.append(StyleViolation(VISUAL_ONLY, segment))
        if len(segment.split()) > SENTENCE_WORD_CEILING:
            violations.append(StyleViolation(TOO_LONG, segment))
    return violations
