"""Pydantic request/response models for the HTTP service."""
from __future__ import annotations

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class AskRequest(BaseModel):
    question: str = Field(min_length=1)


class StepModel(BaseModel):
    index: int
    text: str


class GuidanceModel(BaseModel):
    turn_id: int
    feature: str
    preamble: Optional[str] = None
    steps: List[StepModel]
    raw_text: str


class StepMoveModel(BaseModel):
    step_index: int
    text: str
    boundary: bool


class ConversationMoveModel(BaseModel):
    index: int
    total: int
    boundary: bool


class StatusModel(BaseModel):
    phase: str
    current: Optional[Dict[str, int]] = None
    conversation: Dict[str, int]


class CancelModel(BaseModel):
    cancelled: bool


class TurnModel(BaseModel):
    turn_id: int
    question: str
    answer: str
    feature: str
    steps: List[StepModel]


class HistoryModel(BaseModel):
    turns: List[TurnModel]


class EventModel(BaseModel):
    event_type: str
    payload: Dict[str, Any]
    request_id: Optional[str] = None


class EventsModel(BaseModel):
    events: List[EventModel]


class ErrorModel(BaseModel):
    code: str
    message: str
