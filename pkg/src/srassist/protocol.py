"""Newline-delimited local wire protocol: requests, responses, events."""
from __future__ import annotations

import json
import threading
from typing import Any, Callable, Dict, Optional

from .errors import EngineError
from .events import Event
from .orchestrator import Session

PROTOCOL_ERROR = "protocol_error"

# Ops that start a generation; they run on a worker so cancel stays reachable.
GENERATING_OPS = {"ask", "adaptive", "describe"}
# Ops accepted while a generation is in flight.
ALWAYS_ALLOWED_OPS = {"cancel", "get_status"}

KNOWN_OPS = GENERATING_OPS | ALWAYS_ALLOWED_OPS | {
    "step_next", "step_prev", "conv_prev", "conv_next", "dismiss",
    "clear_history", "get_history",
}


def encode_message(message: Dict[str, Any]) -> str:
    return json.dumps(message, ensure_ascii=False, separators=(",", ":"))


def event_message(event: Event, session_id: str) -> Dict[str, Any]:
    message: Dict[str, Any] = {"kind": "event", "event_type": event.type,
                               "session": session_id, "payload": event.payload}
    if event.request_id is not None:
        message["request_id"] = event.request_id
    return message


def _guidance_payload(guidance) -> Dict[str, Any]:
    return {
        "turn_id": guidance.turn_id,
        "feature": guidance.feature,
        "preamble": guidance.preamble,
        "steps": [{"index": s.index, "text": s.text} for s in guidance.steps],
        "raw_text": guidance.raw_text,
    }


class Dispatcher:
    """Parses one message line at a time and drives a session.

    Malformed input always yields a protocol error response, never an
    exception. Generation ops run on a worker thread so cancel and
    get_status stay responsive; the response line is written when the
    generation completes.
    """

    def __init__(self, session: Session, send: Callable[[str], None],
                 session_id: str = "s1") -> None:
        self.session = session
        self.send = send
        self.session_id = session_id
        self._send_lock = threading.Lock()
        self._workers: list[threading.Thread] = []
        session.bus.subscribe(self._forward_event)

    def _write(self, message: Dict[str, Any]) -> None:
        with self._send_lock:
            self.send(encode_message(message))

    def _forward_event(self, event: Event) -> None:
        self._write(event_message(event, self.session_id))

    def _respond(self, request_id: Any, payload: Dict[str, Any]) -> None:
        self._write({"kind": "response", "id": request_id, "ok": True,
                     "payload": payload})

    def _respond_error(self, request_id: Any, code: str, message: str) -> None:
        self._write({"kind": "response", "id": request_id, "ok": False,
                     "error": {"code": code, "message": message}})

    def handle_line(self, line: str) -> None:
        line = line.strip()
        if not line:
            return
        try:
            message = json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            self._respond_error(None, PROTOCOL_ERROR, f"parse: {exc}")
            return
        if not isinstance(message, dict):
            self._respond_error(None, PROTOCOL_ERROR,
                                "parse: message must be an object")
            return
        request_id = message.get("id")
        if message.get("kind") != "request":
            self._respond_error(request_id, PROTOCOL_ERROR,
                                "invalid_params: kind must be 'request'")
            return
        op = message.get("op")
        if op not in KNOWN_OPS:
            self._respond_error(request_id, PROTOCOL_ERROR,
                                f"unknown_op: {op!r}")
            return
        payload = message.get("payload") or {}
        if not isinstance(payload, dict):
            self._respond_error(request_id, PROTOCOL_ERROR,
                                "invalid_params: payload must be an object")
            return
        if self.session.phase == "generating" and op not in ALWAYS_ALLOWED_OPS:
            self._respond_error(request_id, "busy",
                                "a generation is already in flight")
            return
        if op in GENERATING_OPS:
            worker = threading.Thread(
                target=self._execute_safely, args=(request_id, op, payload),
                daemon=True)
            self._workers.append(worker)
            worker.start()
        else:
            self._execute_safely(request_id, op, payload)

    def join(self, timeout: Optional[float] = None) -> None:
        for worker in self._workers:
            worker.join(timeout)
        self._workers = [w for w in self._workers if w.is_alive()]

    def _execute_safely(self, request_id: Any, op: str,
                        payload: Dict[str, Any]) -> None:
        try:
            result = self._execute(op, payload)
        except EngineError as exc:
            self._respond_error(request_id, exc.code, str(exc))
        except (TypeError, ValueError, KeyError) as exc:
            self._respond_error(request_id, PROTOCOL_ERROR,
                                f"invalid_params: {exc}")
        else:
            self._respond(request_id, result)

    def _execute(self, op: str, payload: Dict[str, Any]) -> Dict[str, Any]:
        session = self.session
        if op == "ask":
            question = payload.get("question")
            if not isinstance(question, str):
                raise ValueError("'question' must be a string")
            return _guidance_payload(session.contextual_qa(question))
        if op == "adaptive":
            return _guidance_payload(session.adaptive_support())
        if op == "describe":
            return _guidance_payload(session.screen_description())
        if op in ("step_next", "step_prev"):
            step, boundary = (session.next_step() if op == "step_next"
                              else session.prev_step())
            return {"step_index": step.index, "text": step.text,
                    "boundary": boundary}
        if op in ("conv_prev", "conv_next"):
            index, total, boundary = (session.conversation_prev()
                                      if op == "conv_prev"
                                      else session.conversation_next())
            return {"index": index, "total": total, "boundary": boundary}
        if op == "cancel":
            return {"cancelled": session.cancel()}
        if op == "dismiss":
            session.dismiss()
            return {}
        if op == "clear_history":
            session.clear_history()
            return {}
        if op == "get_history":
            n = payload.get("n")
            turns = session.store.history(n if isinstance(n, int) else None)
            return {"turns": [{
                "turn_id": t.turn_id, "question": t.question,
                "answer": t.answer, "feature": t.feature.value,
                "steps": [{"index": s.index, "text": s.text} for s in t.steps],
            } for t in turns]}
        if op == "get_status":
            return session.status()
        raise ValueError(f"unhandled op {op}")
