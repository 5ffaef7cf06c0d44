"""Engine-to-client status events and the fan-out bus."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

GENERATING_STARTED = "generating_started"
HEARTBEAT = "heartbeat"
GENERATING_FINISHED = "generating_finished"
ANNOUNCE = "announce"
FOCUS_RESTORED = "focus_restored"
ERROR = "error"


@dataclass
class Event:
    type: str
    payload: Dict[str, Any] = field(default_factory=dict)
    request_id: Optional[str] = None


EventSink = Callable[[Event], None]


class EventBus:
    """Delivers events to every subscribed sink, in emission order."""

    def __init__(self) -> None:
        self._sinks: List[EventSink] = []
        self._lock = threading.Lock()

    def subscribe(self, sink: EventSink) -> Callable[[], None]:
        with self._lock:
            self._sinks.append(sink)

        def unsubscribe() -> None:
            with self._lock:
                if sink in self._sinks:
                    self._sinks.remove(sink)

        return unsubscribe

    def emit(self, type: str, payload: Optional[Dict[str, Any]] = None,
             request_id: Optional[str] = None) -> Event:
        event = Event(type=type, payload=payload or {}, request_id=request_id)
        with self._lock:
            sinks = list(self._sinks)
        for sink in sinks:
            sink(event)
        return event
