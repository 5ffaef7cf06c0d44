"""Session state machine: features, step parsing, and step/dialog navigation."""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .config import EngineConfig
from .context import ContextStore, Feature
from .errors import (AdapterUnavailable, Busy, Cancelled, EmptyQuestion,
                     EngineError, NoGuidanceAvailable, ProviderError)
from .events import ANNOUNCE, ERROR, EventBus, FOCUS_RESTORED
from .gateway import ModelGateway, ModelRequest
from .guidance import GuidanceResponse, Step, parse_steps
from .kb.store import KnowledgeBase
from .context import ChatTurn
from .platform_sim import PlatformAdapter, capture_environment
from .prompts import PromptAssembler

PHASE_IDLE = "idle"
PHASE_GENERATING = "generating"


@dataclass
class StepPosition:
    turn_id: int
    step_index: int


class Session:
    """Owns one user-facing assistance session.

    At most one generation is in flight; concurrent feature requests get a
    busy error, never a queue. Navigation never touches focus or windows:
    it emits only announce events.
    """

    def __init__(self, store: ContextStore, gateway: ModelGateway,
                 assembler: PromptAssembler, adapter: PlatformAdapter,
                 kb: Optional[KnowledgeBase] = None,
                 config: Optional[EngineConfig] = None) -> None:
        self.store = store
        self.gateway = gateway
        self.assembler = assembler
        self.adapter = adapter
        self.kb = kb
        self.config = config or EngineConfig()
        self.bus: EventBus = gateway.bus
        self._phase = PHASE_IDLE
        self._phase_lock = threading.Lock()
        self._cancel = threading.Event()
        self.current: Optional[StepPosition] = None
        self.conversation_cursor = 0  # 1-based once history exists
        self._trace_unsubscribe = None
        if adapter.capabilities.can_trace:
            self._trace_unsubscribe = adapter.subscribe_trace(
                self.store.append_trace_event)

    # -- phase management -----------------------------------------------------
    @property
    def phase(self) -> str:
        with self._phase_lock:
            return self._phase

    def _enter_generating(self) -> None:
        with self._phase_lock:
            if self._phase != PHASE_IDLE:
                raise Busy("a generation is already in flight")
            self._phase = PHASE_GENERATING
            self._cancel.clear()

    def _leave_generating(self) -> None:
        with self._phase_lock:
            self._phase = PHASE_IDLE

    # -- shared pipeline ----------------------------------------------------
    def _capture(self) -> None:
        try:
            state, shot = capture_environment(self.adapter)
            self.store.set_environment(state, shot)
        except AdapterUnavailable:
            self.store.clear_environment()  # bundle carries missing markers

    def _run_feature(self, feature: Feature, question: Optional[str],
                     fallback_single_step: bool) -> GuidanceResponse:
        self._enter_generating()
        try:
            self._capture()
            docs_text = None
            if feature is Feature.CONTEXTUAL_QA and self.kb is not None:
                hits = self.kb.search(question or "", self.config.retrieval_k,
                                      self.gateway.embedder,
                                      use_hyde=self.config.use_hyde,
                                      provider=self.gateway.provider)
                docs_text = self.kb.format_hits(hits)
            bundle = self.store.build_bundle(feature, question=question,
                                             kb_hits_text=docs_text)
            prompt = self.assembler.render(feature.value, bundle,
                                           question=question)
            request = ModelRequest(prompt=prompt,
                                   max_output_tokens=self.config.max_output_tokens)
            try:
                response = self.gateway.complete(request, feature=feature.value,
                                                 cancel=self._cancel)
            except Cancelled:
                raise
            except ProviderError as exc:
                self.bus.emit(ERROR, {"code": exc.code,
                                      "message": f"The assistant could not "
                                                 f"answer: {exc}"})
                raise
            preamble, steps = parse_steps(
                response.text, fallback_single_step=fallback_single_step)
            turn = ChatTurn(turn_id=self.store.next_turn_id(),
                            question=question or f"[{feature.value}]",
                            answer=response.text, steps=steps, feature=feature,
                            at=int(time.time() * 1000),
                            env_snapshot=self.store.environment())
            self.store.push_chat_turn(turn)
            self.conversation_cursor = len(self.store.history())
            self.bus.emit(ANNOUNCE, {"text": response.text, "kind": "response",
                                     "turn_id": turn.turn_id},
                          request_id=request.request_id)
            self.current = (StepPosition(turn.turn_id, 1) if steps else None)
            return GuidanceResponse(turn_id=turn.turn_id, preamble=preamble,
                                    steps=steps, raw_text=response.text,
                                    feature=feature.value)
        finally:
            self._leave_generating()

    # -- features ------------------------------------------------------------
    def contextual_qa(self, question: str) -> GuidanceResponse:
        if not question or not question.strip():
            raise EmptyQuestion("question must be non-empty")
        return self._run_feature(Feature.CONTEXTUAL_QA, question,
                                 fallback_single_step=True)

    def adaptive_support(self) -> GuidanceResponse:
        return self._run_feature(Feature.ADAPTIVE_SUPPORT, None,
                                 fallback_single_step=True)

    def screen_description(self) -> GuidanceResponse:
        return self._run_feature(Feature.SCREEN_DESCRIPTION, None,
                                 fallback_single_step=False)

    # -- step navigation ---------------------------------------------------
    def _current_steps(self) -> Tuple[StepPosition, List[Step]]:
        if self.current is None:
            raise NoGuidanceAvailable("no guidance to navigate")
        turn = self.store.get_turn(self.current.turn_id)
        if not turn.steps:
            raise NoGuidanceAvailable("current turn has no steps")
        return self.current, turn.steps

    def _move_step(self, delta: int) -> Tuple[Step, bool]:
        position, steps = self._current_steps()
        target = position.step_index + delta
        boundary = False
        if target < 1:
            target = 1
            boundary = True
        elif target > len(steps):
            target = len(steps)
            boundary = True
        position.step_index = target
        step = steps[target - 1]
        self.store.set_stalled_step(position.turn_id, target)
        if boundary:
            edge = "first step" if delta < 0 else "last step"
            text = f"Already at the {edge}. Step {step.index}: {step.text}"
        else:
            text = f"Step {step.index}: {step.text}"
        self.bus.emit(ANNOUNCE, {"text": text, "kind": "step",
                                 "turn_id": position.turn_id,
                                 "step_index": step.index,
                                 "boundary": boundary})
        return step, boundary

    def next_step(self) -> Tuple[Step, bool]:
        return self._move_step(1)

    def prev_step(self) -> Tuple[Step, bool]:
        return self._move_step(-1)

    # -- dialog controls ---------------------------------------------------
    def cancel(self) -> bool:
        with self._phase_lock:
            if self._phase != PHASE_GENERATING:
                return False  # cancel when idle is a no-op
            self._cancel.set()
            return True

    def dismiss(self) -> None:
        self.bus.emit(FOCUS_RESTORED, {})

    def _move_conversation(self, delta: int) -> Tuple[int, int, bool]:
        total = len(self.store.history())
        if total == 0:
            raise NoGuidanceAvailable("no conversations yet")
        target = self.conversation_cursor + delta
        boundary = False
        if target < 1:
            target, boundary = 1, True
        elif target > total:
            target, boundary = total, True
        self.conversation_cursor = target
        self.bus.emit(ANNOUNCE, {"text": f"Conversation {target} of {total}",
                                 "kind": "conversation", "boundary": boundary})
        return target, total, boundary

    def conversation_prev(self) -> Tuple[int, int, bool]:
        return self._move_conversation(-1)

    def conversation_next(self) -> Tuple[int, int, bool]:
        return self._move_conversation(1)

    def clear_history(self) -> None:
        self.store.clear_history()
        self.current = None
        self.conversation_cursor = 0

    def status(self) -> dict:
        current = None
        if self.current is not None:
            current = {"turn_id": self.current.turn_id,
                       "step_index": self.current.step_index}
        return {"phase": self.phase, "current": current,
                "conversation": {"index": self.conversation_cursor,
                                 "total": len(self.store.history())}}

    def close(self) -> None:
        if self._trace_unsubscribe is not None:
            self._trace_unsubscribe()
