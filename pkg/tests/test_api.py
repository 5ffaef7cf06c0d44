"""HTTP layer: endpoints, error statuses, and the event drain."""
from __future__ import annotations

import threading
import time

import pytest
from fastapi.testclient import TestClient

from srassist.api import create_app
from srassist.gateway import MockCompletionProvider, ScriptRule
from tests.conftest import make_engine

ANSWER = "1. Press Alt+N to open Insert.\n2. Press Enter."


@pytest.fixture
def client():
    engine = make_engine(rules=[
        ScriptRule(match="page numbers", response=ANSWER, latency_ms=2000)])
    return TestClient(create_app(engine)), engine


def test_ask_and_step_navigation(client):
    http, _ = client
    response = http.post("/ask", json={"question": "How to add page numbers?"})
    assert response.status_code == 200
    body = response.json()
    assert body["turn_id"] == 1
    assert len(body["steps"]) == 2
    assert "Alt+N" in body["steps"][0]["text"]

    step = http.post("/step/next").json()
    assert step == {"step_index": 2, "text": "Press Enter.",
                    "boundary": False}
    step = http.post("/step/next").json()
    assert step["boundary"] is True and step["step_index"] == 2


def test_describe_adaptive_and_status(client):
    http, _ = client
    assert http.post("/describe").status_code == 200
    assert http.post("/adaptive").status_code == 200
    status = http.get("/status").json()
    assert status["phase"] == "idle"
    assert status["conversation"]["total"] == 2


def test_validation_and_engine_errors(client):
    http, _ = client
    assert http.post("/ask", json={}).status_code == 422  # pydantic guard
    empty = http.post("/ask", json={"question": "  "})
    assert empty.status_code == 422
    assert empty.json()["detail"]["code"] == "empty_question"
    no_guidance = http.post("/step/next")
    assert no_guidance.status_code == 404
    assert no_guidance.json()["detail"]["code"] == "no_guidance_available"


def test_busy_maps_to_409():
    provider = MockCompletionProvider(rules=[
        ScriptRule(match="slow", response="1. x", block_ms=3000)])
    engine = make_engine(provider=provider)
    http = TestClient(create_app(engine))
    thread = threading.Thread(
        target=lambda: http.post("/ask", json={"question": "slow one"}))
    thread.start()
    deadline = time.time() + 2.0
    while engine.session.phase != "generating" and time.time() < deadline:
        time.sleep(0.005)
    busy = http.post("/adaptive")
    assert busy.status_code == 409
    assert busy.json()["detail"]["code"] == "busy"
    assert http.post("/cancel").json()["cancelled"] is True
    thread.join(timeout=5.0)


def test_history_round_trip(client):
    http, _ = client
    http.post("/ask", json={"question": "How to add page numbers?"})
    turns = http.get("/history").json()["turns"]
    assert len(turns) == 1
    assert turns[0]["feature"] == "contextual_qa"
    assert http.delete("/history").status_code == 200
    assert http.get("/history").json()["turns"] == []


def test_events_drain(client):
    http, _ = client
    http.post("/ask", json={"question": "How to add page numbers?"})
    http.post("/dismiss")
    events = http.get("/events").json()["events"]
    types = [e["event_type"] for e in events]
    assert types == ["generating_started", "heartbeat", "heartbeat",
                     "generating_finished", "announce", "focus_restored"]
    assert http.get("/events").json()["events"] == []  # drained
