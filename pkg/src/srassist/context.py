"""Interaction context: screen snapshots, SR traces, chat history, bundles.

Holds the environment and conversational context families and assembles the
per-feature context bundles fed to the prompt assembler. Knowledge context
(retrieved docs) is injected by the caller.
"""
from __future__ import annotations

import io
import threading
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import MissingRequiredInput, StepOutOfRange, UnknownTurn
from .gateway import count_tokens
from .guidance import Step

TRUNCATION_MARKER = "[truncated]"
MARKER_TOKENS = count_tokens(TRUNCATION_MARKER)
MISSING_BLOCK_MARKER = "(not available)"
NO_STALLED_STEP_MARKER = "none recorded"


class Feature(str, Enum):
    CONTEXTUAL_QA = "contextual_qa"
    ADAPTIVE_SUPPORT = "adaptive_support"
    SCREEN_DESCRIPTION = "screen_description"


class BlockTag(str, Enum):
    SCREENSHOT = "screenshot_ref"
    SCREEN_STATE = "screen_state_text"
    SR_TRACE = "sr_trace_text"
    RETRIEVED_DOCS = "retrieved_docs_text"
    CHAT_HISTORY = "chat_history_text"
    STALLED_STEP = "stalled_step_text"


# Fixed per-feature block rule table; bundles never deviate from it.
FEATURE_BLOCKS: Dict[Feature, Tuple[BlockTag, ...]] = {
    Feature.CONTEXTUAL_QA: (
        BlockTag.SCREENSHOT, BlockTag.SCREEN_STATE,
        BlockTag.RETRIEVED_DOCS, BlockTag.CHAT_HISTORY,
    ),
    Feature.ADAPTIVE_SUPPORT: (
        BlockTag.SCREENSHOT, BlockTag.SCREEN_STATE, BlockTag.SR_TRACE,
        BlockTag.CHAT_HISTORY, BlockTag.STALLED_STEP,
    ),
    Feature.SCREEN_DESCRIPTION: (
        BlockTag.SCREENSHOT, BlockTag.SCREEN_STATE,
    ),
}


@dataclass
class Rect:
    x: int
    y: int
    w: int
    h: int


@dataclass
class FocusElement:
    name: str  # may be empty for unlabeled elements
    role: str
    bounds: Rect
    control_type: Optional[str] = None
    value: Optional[str] = None
    shortcut: Optional[str] = None
    help_text: Optional[str] = None
    description: Optional[str] = None

    def __post_init__(self) -> None:
        if self.bounds.w < 0 or self.bounds.h < 0:
            raise ValueError("focus bounds must have non-negative size")


@dataclass
class ScreenState:
    app_name: str
    window_title: str
    focus: FocusElement
    captured_at: int  # ms since epoch
    app_version: Optional[str] = None

    def to_text(self) -> str:
        """Deterministic line-oriented serialization (stable field order)."""
        f = self.focus
        lines = [
            f"app: {self.app_name}",
            f"version: {self.app_version or ''}",
            f"window: {self.window_title}",
            f"focus.name: {f.name}",
            f"focus.role: {f.role}",
            f"focus.control_type: {f.control_type or ''}",
            f"focus.value: {f.value or ''}",
            f"focus.shortcut: {f.shortcut or ''}",
            f"focus.help_text: {f.help_text or ''}",
            f"focus.description: {f.description or ''}",
            f"focus.bounds: {f.bounds.x},{f.bounds.y},{f.bounds.w},{f.bounds.h}",
        ]
        return "\n".join(lines)


@dataclass
class Screenshot:
    width: int
    height: int
    pixels: np.ndarray  # HxWx3 uint8
    captured_at: int
    focus_rect: Optional[Rect] = None
    highlighted: bool = False

    def png_bytes(self) -> bytes:
        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()


class TraceKind(str, Enum):
    GESTURE = "gesture"
    SPEECH = "speech"


@dataclass
class SRTraceEvent:
    at: int  # ms since epoch
    kind: TraceKind
    payload: str

    def __post_init__(self) -> None:
        if not self.payload:
            raise ValueError("trace event payload must be non-empty")


def trace_to_text(events: Sequence[SRTraceEvent]) -> str:
    """One event per line: ``[<iso-timestamp>] <GESTURE|SPEECH>: <payload>``."""
    lines = []
    for event in events:
        ts = datetime.fromtimestamp(event.at / 1000.0, tz=timezone.utc)
        iso = ts.isoformat(timespec="milliseconds")
        lines.append(f"[{iso}] {event.kind.value.upper()}: {event.payload}")
    return "\n".join(lines)


class TraceBuffer:
    """Bounded chronological event log; oldest-first eviction.

    Safe for a single concurrent producer with snapshot reads.
    """

    def __init__(self, capacity: int = 500) -> None:
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        self.capacity = capacity
        self._events: Deque[SRTraceEvent] = deque(maxlen=capacity)
        self._lock = threading.Lock()

    def append(self, event: SRTraceEvent) -> None:
        with self._lock:
            if self._events and event.at < self._events[-1].at:
                raise ValueError("trace events must be non-decreasing in time")
            self._events.append(event)

    def recent(self, n: int) -> List[SRTraceEvent]:
        if n < 0:
            raise ValueError("n must be non-negative")
        with self._lock:
            if n == 0:
                return []
            return list(self._events)[-n:]

    def last_at(self) -> Optional[int]:
        with self._lock:
            return self._events[-1].at if self._events else None

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)


@dataclass
class ChatTurn:
    turn_id: int
    question: str
    answer: str
    steps: List[Step]
    feature: Feature
    at: int
    env_snapshot: Optional[Tuple[ScreenState, Screenshot]] = None  # logging only


@dataclass
class StalledStep:
    turn_id: int
    step_index: int  # 1-based


@dataclass
class Block:
    tag: BlockTag
    text: str
    truncated: bool = False
    present: bool = True


@dataclass
class ContextBundle:
    feature: Feature
    blocks: List[Block]
    screenshot: Optional[Screenshot] = None

    def block(self, tag: BlockTag) -> Block:
        for b in self.blocks:
            if b.tag == tag:
                return b
        raise KeyError(tag)

    def tags(self) -> Tuple[BlockTag, ...]:
        return tuple(b.tag for b in self.blocks)


@dataclass
class BlockBudgets:
    """Token budgets applied per block before prompt assembly."""
    screen_state: int = 512
    sr_trace: int = 1024
    retrieved_docs: int = 2048
    chat_history: int = 2048
    stalled_step: int = 256


def truncate_block(text: str, budget: int, policy: str,
                   tokenizer=count_tokens) -> Tuple[str, bool]:
    """Cut text to ``budget`` tokens plus a fixed marker.

    ``keep_head`` retains the prefix (docs: headers lead); ``keep_tail``
    retains the suffix (traces/history: recency matters). Returns the
    original text untouched when it fits.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    if policy not in ("keep_head", "keep_tail"):
        raise ValueError(f"unknown truncation policy: {policy}")
    if tokenizer(text) <= budget:
        return text, False
    tokens = text.split()
    if policy == "keep_head":
        kept = tokens[:budget]
        out = " ".join(kept + [TRUNCATION_MARKER]) if kept else TRUNCATION_MARKER
    else:
        kept = tokens[-budget:] if budget > 0 else []
        out = " ".join([TRUNCATION_MARKER] + kept) if kept else TRUNCATION_MARKER
    return out, True


class ContextStore:
    """Session-scoped context: environment snapshot, trace, history, stalled step."""

    def __init__(self, trace_capacity: int = 500, trace_window: int = 50,
                 budgets: Optional[BlockBudgets] = None,
                 tokenizer=count_tokens) -> None:
        self.trace = TraceBuffer(trace_capacity)
        self.trace_window = trace_window
        self.budgets = budgets or BlockBudgets()
        self.tokenizer = tokenizer
        self._lock = threading.Lock()
        self._turns: List[ChatTurn] = []
        self._stalled: Optional[StalledStep] = None
        self._env: Optional[Tuple[ScreenState, Screenshot]] = None
        self._next_turn_id = 1

    # -- trace -------------------------------------------------------------
    def append_trace_event(self, event: SRTraceEvent) -> None:
        self.trace.append(event)

    def recent_trace(self, n: int) -> List[SRTraceEvent]:
        return self.trace.recent(n)

    # -- environment snapshot ------------------------------------------------
    def set_environment(self, state: ScreenState, screenshot: Screenshot) -> None:
        with self._lock:
            self._env = (state, screenshot)

    def clear_environment(self) -> None:
        with self._lock:
            self._env = None

    def environment(self) -> Optional[Tuple[ScreenState, Screenshot]]:
        with self._lock:
            return self._env

    # -- chat history --------------------------------------------------------
    def next_turn_id(self) -> int:
        with self._lock:
            return self._next_turn_id

    def push_chat_turn(self, turn: ChatTurn) -> None:
        with self._lock:
            if turn.turn_id != self._next_turn_id:
                raise ValueError(
                    f"turn_id must be {self._next_turn_id}, got {turn.turn_id}")
            self._turns.append(turn)
            self._next_turn_id += 1

    def history(self, n: Optional[int] = None) -> List[ChatTurn]:
        with self._lock:
            if n is None:
                return list(self._turns)
            if n <= 0:
                return []
            return self._turns[-n:]

    def clear_history(self) -> None:
        with self._lock:
            self._turns = []
            self._stalled = None
            self._next_turn_id = 1  # sessions are self-contained

    def get_turn(self, turn_id: int) -> ChatTurn:
        with self._lock:
            for turn in self._turns:
                if turn.turn_id == turn_id:
                    return turn
        raise UnknownTurn(f"no turn with id {turn_id}")

    # -- stalled step ----------------------------------------------------------
    def set_stalled_step(self, turn_id: int, step_index: int) -> None:
        turn = self.get_turn(turn_id)
        if not (1 <= step_index <= len(turn.steps)):
            raise StepOutOfRange(
                f"step {step_index} out of range for turn {turn_id}")
        with self._lock:
            self._stalled = StalledStep(turn_id=turn_id, step_index=step_index)

    def get_stalled_step(self) -> Optional[StalledStep]:
        with self._lock:
            return self._stalled

    # -- bundle assembly ---------------------------------------------------------
    def _history_text(self) -> str:
        turns = self.history()
        parts = []
        for turn in turns:
            parts.append(f"User: {turn.question}\nAssistant: {turn.answer}")
        return "\n\n".join(parts)

    def _stalled_text(self) -> str:
        stalled = self.get_stalled_step()
        if stalled is None:
            return NO_STALLED_STEP_MARKER
        turn = self.get_turn(stalled.turn_id)
        step = turn.steps[stalled.step_index - 1]
        return (f"turn {stalled.turn_id}, step {stalled.step_index}: {step.text}")

    def _truncated(self, tag: BlockTag, text: str, budget: int,
                   policy: str) -> Block:
        if not text:
            return Block(tag=tag, text=MISSING_BLOCK_MARKER, present=False)
        out, cut = truncate_block(text, budget, policy, self.tokenizer)
        return Block(tag=tag, text=out, truncated=cut)

    def build_bundle(self, feature: Feature, question: Optional[str] = None,
                     kb_hits_text: Optional[str] = None) -> ContextBundle:
        """Assemble the fixed per-feature block set (see FEATURE_BLOCKS)."""
        feature = Feature(feature)
        if feature is Feature.CONTEXTUAL_QA and not question:
            raise MissingRequiredInput("contextual_qa requires a question")
        env = self.environment()
        budgets = self.budgets
        blocks: List[Block] = []
        for tag in FEATURE_BLOCKS[feature]:
            if tag is BlockTag.SCREENSHOT:
                if env is not None:
                    blocks.append(Block(tag=tag, text="current-screenshot"))
                else:
                    blocks.append(Block(tag=tag, text=MISSING_BLOCK_MARKER,
                                        present=False))
            elif tag is BlockTag.SCREEN_STATE:
                text = env[0].to_text() if env is not None else ""
                blocks.append(self._truncated(tag, text, budgets.screen_state,
                                              "keep_head"))
            elif tag is BlockTag.SR_TRACE:
                text = trace_to_text(self.recent_trace(self.trace_window))
                blocks.append(self._truncated(tag, text, budgets.sr_trace,
                                              "keep_tail"))
            elif tag is BlockTag.RETRIEVED_DOCS:
                blocks.append(self._truncated(tag, kb_hits_text or "",
                                              budgets.retrieved_docs,
                                              "keep_head"))
            elif tag is BlockTag.CHAT_HISTORY:
                blocks.append(self._truncated(tag, self._history_text(),
                                              budgets.chat_history,
                                              "keep_tail"))
            elif tag is BlockTag.STALLED_STEP:
                text, cut = truncate_block(self._stalled_text(),
                                           budgets.stalled_step, "keep_head",
                                           self.tokenizer)
                blocks.append(Block(tag=tag, text=text, truncated=cut))
        return ContextBundle(feature=feature, blocks=blocks,
                             screenshot=env[1] if env is not None else None)
