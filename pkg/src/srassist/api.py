"""HTTP service wrapping one engine session.

A thin FastAPI layer over the orchestrator for local clients that prefer
HTTP; the newline-delimited socket/stdio protocol remains the primary
client surface.
"""
from __future__ import annotations

import threading
from collections import deque
from typing import Deque, Optional

from fastapi import FastAPI, HTTPException

from .engine import Engine
from .errors import EngineError
from .events import Event
from .guidance import GuidanceResponse
from .schemas import (AskRequest, CancelModel, ConversationMoveModel,
                      EventModel, EventsModel, GuidanceModel, HistoryModel,
                      StatusModel, StepModel, StepMoveModel, TurnModel)

_ERROR_STATUS = {
    "busy": 409,
    "empty_question": 422,
    "no_guidance_available": 404,
    "unknown_turn": 404,
    "step_out_of_range": 404,
    "provider_error": 502,
    "provider_timeout": 504,
    "cancelled": 499,
    "adapter_unavailable": 503,
}


def _guidance_model(guidance: GuidanceResponse) -> GuidanceModel:
    return GuidanceModel(
        turn_id=guidance.turn_id, feature=guidance.feature,
        preamble=guidance.preamble,
        steps=[StepModel(index=s.index, text=s.text) for s in guidance.steps],
        raw_text=guidance.raw_text)


def create_app(engine: Engine, max_buffered_events: int = 1000) -> FastAPI:
    app = FastAPI(title="srassist", version="0.1.0")
    session = engine.session

    events: Deque[Event] = deque(maxlen=max_buffered_events)
    events_lock = threading.Lock()

    def collect(event: Event) -> None:
        with events_lock:
            events.append(event)

    engine.bus.subscribe(collect)

    def run(callable_):
        try:
            return callable_()
        except EngineError as exc:
            status = _ERROR_STATUS.get(exc.code, 500)
            raise HTTPException(status_code=status,
                                detail={"code": exc.code, "message": str(exc)})

    @app.post("/ask", response_model=GuidanceModel)
    def ask(request: AskRequest) -> GuidanceModel:
        return _guidance_model(run(lambda: session.contextual_qa(request.question)))

    @app.post("/adaptive", response_model=GuidanceModel)
    def adaptive() -> GuidanceModel:
        return _guidance_model(run(session.adaptive_support))

    @app.post("/describe", response_model=GuidanceModel)
    def describe() -> GuidanceModel:
        return _guidance_model(run(session.screen_description))

    @app.post("/step/next", response_model=StepMoveModel)
    def step_next() -> StepMoveModel:
        step, boundary = run(session.next_step)
        return StepMoveModel(step_index=step.index, text=step.text,
                             boundary=boundary)

    @app.post("/step/prev", response_model=StepMoveModel)
    def step_prev() -> StepMoveModel:
        step, boundary = run(session.prev_step)
        return StepMoveModel(step_index=step.index, text=step.text,
                             boundary=boundary)

    @app.post("/conversation/prev", response_model=ConversationMoveModel)
    def conv_prev() -> ConversationMoveModel:
        index, total, boundary = run(session.conversation_prev)
        return ConversationMoveModel(index=index, total=total, boundary=boundary)

    @app.post("/conversation/next", response_model=ConversationMoveModel)
    def conv_next() -> ConversationMoveModel:
        index, total, boundary = run(session.conversation_next)
        return ConversationMoveModel(index=index, total=total, boundary=boundary)

    @app.post("/cancel", response_model=CancelModel)
    def cancel() -> CancelModel:
        return CancelModel(cancelled=session.cancel())

    @app.post("/dismiss")
    def dismiss() -> dict:
        session.dismiss()
        return {}

    @app.get("/status", response_model=StatusModel)
    def status() -> StatusModel:
        return StatusModel(**session.status())

    @app.get("/history", response_model=HistoryModel)
    def history(n: Optional[int] = None) -> HistoryModel:
        turns = session.store.history(n)
        return HistoryModel(turns=[
            TurnModel(turn_id=t.turn_id, question=t.question, answer=t.answer,
                      feature=t.feature.value,
                      steps=[StepModel(index=s.index, text=s.text)
                             for s in t.steps])
            for t in turns])

    @app.delete("/history")
    def clear_history() -> dict:
        session.clear_history()
        return {}

    @app.get("/events", response_model=EventsModel)
    def drain_events() -> EventsModel:
        with events_lock:
            drained = list(events)
            events.clear()
        return EventsModel(events=[
            EventModel(event_type=e.type, payload=e.payload,
                       request_id=e.request_id) for e in drained])

    return app
