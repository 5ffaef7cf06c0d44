"""Desktop/screen-reader abstraction plus a scriptable simulated desktop.

Real capture backends (NVDA on Windows) live in the client; everything in
the engine and its tests runs against the simulator.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .context import (FocusElement, Rect, Screenshot, ScreenState,
                      SRTraceEvent, TraceKind)
from .errors import AdapterUnavailable, CapabilityMissing

HIGHLIGHT_COLOR = (255, 0, 0)
HIGHLIGHT_WIDTH = 3


@dataclass
class AdapterCapabilities:
    can_screenshot: bool = True
    can_focus_bounds: bool = True
    can_trace: bool = True


class PlatformAdapter:
    """Boundary to the desktop environment."""

    capabilities = AdapterCapabilities()

    def get_screen_state(self) -> ScreenState:
        raise NotImplementedError

    def get_screenshot(self) -> Screenshot:
        raise NotImplementedError

    def subscribe_trace(self, sink: Callable[[SRTraceEvent], None]) -> Callable[[], None]:
        raise NotImplementedError


def _clip_rect(rect: Rect, width: int, height: int) -> Optional[Tuple[int, int, int, int]]:
    x0 = max(rect.x, 0)
    y0 = max(rect.y, 0)
    x1 = min(rect.x + rect.w, width)
    y1 = min(rect.y + rect.h, height)
    if x1 <= x0 or y1 <= y0:
        return None
    return x0, y0, x1, y1


def border_mask(rect: Rect, width: int, height: int,
                border: int = HIGHLIGHT_WIDTH) -> np.ndarray:
    """Boolean mask of the border pixels a highlight would touch."""
    mask = np.zeros((height, width), dtype=bool)
    outer = _clip_rect(rect, width, height)
    if outer is None or rect.w == 0 or rect.h == 0:
        return mask
    x0, y0, x1, y1 = outer
    mask[y0:y1, x0:x1] = True
    inner = _clip_rect(Rect(rect.x + border, rect.y + border,
                            max(rect.w - 2 * border, 0),
                            max(rect.h - 2 * border, 0)), width, height)
    if inner is not None:
        ix0, iy0, ix1, iy1 = inner
        mask[iy0:iy1, ix0:ix1] = False
    return mask


def highlight_focus(screenshot: Screenshot, rect: Rect,
                    border: int = HIGHLIGHT_WIDTH,
                    color: Tuple[int, int, int] = HIGHLIGHT_COLOR) -> Screenshot:
    """Pure function: return a copy with a red border along rect, clipped."""
    pixels = screenshot.pixels.copy()
    mask = border_mask(rect, screenshot.width, screenshot.height, border)
    if mask.any():
        pixels[mask] = color
        highlighted = True
        focus_rect = rect
    else:
        highlighted = screenshot.highlighted
        focus_rect = screenshot.focus_rect
    return Screenshot(width=screenshot.width, height=screenshot.height,
                      pixels=pixels, captured_at=screenshot.captured_at,
                      focus_rect=focus_rect, highlighted=highlighted)


@dataclass
class LabeledRect:
    x: int
    y: int
    w: int
    h: int
    color: Tuple[int, int, int] = (200, 200, 200)
    label: str = ""


@dataclass
class RasterSpec:
    """Declarative synthetic screenshot: solid background + labeled rectangles."""
    width: int = 640
    height: int = 480
    background: Tuple[int, int, int] = (240, 240, 240)
    rects: List[LabeledRect] = field(default_factory=list)

    def render(self) -> np.ndarray:
        img = np.empty((self.height, self.width, 3), dtype=np.uint8)
        img[:, :] = self.background
        for r in self.rects:
            clipped = _clip_rect(Rect(r.x, r.y, r.w, r.h), self.width, self.height)
            if clipped is None:
                continue
            x0, y0, x1, y1 = clipped
            img[y0:y1, x0:x1] = r.color
        return img


@dataclass
class Frame:
    screen_state: ScreenState
    raster: RasterSpec


@dataclass
class SimulatedDesktopScript:
    frames: List[Frame]
    trace_script: List[SRTraceEvent] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.frames:
            raise ValueError("simulator script needs at least one frame")


class SimulatedDesktop(PlatformAdapter):
    """Deterministic desktop playback driven by a fixture script."""

    def __init__(self, script: SimulatedDesktopScript,
                 capabilities: Optional[AdapterCapabilities] = None) -> None:
        self.script = script
        self.capabilities = capabilities or AdapterCapabilities()
        self.cursor = 0
        self._open = True
        self._sinks: List[Callable[[SRTraceEvent], None]] = []
        self._lock = threading.Lock()

    def shutdown(self) -> None:
        self._open = False

    def _check_open(self) -> None:
        if not self._open:
            raise AdapterUnavailable("adapter is not initialized")

    def advance(self, n: int = 1) -> None:
        with self._lock:
            self.cursor = min(self.cursor + n, len(self.script.frames) - 1)

    def current_frame(self) -> Frame:
        self._check_open()
        with self._lock:
            return self.script.frames[self.cursor]

    def get_screen_state(self) -> ScreenState:
        frame = self.current_frame()
        state = frame.screen_state
        # Re-stamp capture time so snapshot coherence is observable.
        return ScreenState(app_name=state.app_name,
                           app_version=state.app_version,
                           window_title=state.window_title,
                           focus=state.focus,
                           captured_at=int(time.time() * 1000))

    def get_screenshot(self) -> Screenshot:
        frame = self.current_frame()
        if not self.capabilities.can_screenshot:
            raise CapabilityMissing("screenshots not supported")
        raw = Screenshot(width=frame.raster.width, height=frame.raster.height,
                         pixels=frame.raster.render(),
                         captured_at=int(time.time() * 1000),
                         focus_rect=frame.screen_state.focus.bounds
                         if self.capabilities.can_focus_bounds else None)
        if raw.focus_rect is not None:
            return highlight_focus(raw, raw.focus_rect)
        return raw

    def subscribe_trace(self, sink: Callable[[SRTraceEvent], None]) -> Callable[[], None]:
        if not self.capabilities.can_trace:
            raise CapabilityMissing("trace capture not supported")
        with self._lock:
            self._sinks.append(sink)

        def unsubscribe() -> None:
            with self._lock:
                if sink in self._sinks:
                    self._sinks.remove(sink)

        return unsubscribe

    def deliver_trace_event(self, event: SRTraceEvent) -> None:
        with self._lock:
            sinks = list(self._sinks)
        for sink in sinks:
            sink(event)

    def play_trace(self) -> None:
        """Deliver the scripted trace events to all sinks, in time order."""
        for event in sorted(self.script.trace_script, key=lambda e: e.at):
            self.deliver_trace_event(event)


def capture_environment(adapter: PlatformAdapter) -> Tuple[ScreenState, Screenshot]:
    """Snapshot screen state and a focus-highlighted screenshot together.

    Both captures happen back to back so their timestamps stay within the
    100 ms coherence bound.
    """
    state = adapter.get_screen_state()
    shot = adapter.get_screenshot()
    if not shot.highlighted and adapter.capabilities.can_focus_bounds:
        shot = highlight_focus(shot, state.focus.bounds)
    return state, shot


# ---------------------------------------------------------------------------
# Fixture (de)serialization

def frame_from_dict(data: Dict) -> Frame:
    ss = data["screen_state"]
    focus = ss["focus"]
    bounds = focus.get("bounds", {"x": 0, "y": 0, "w": 0, "h": 0})
    state = ScreenState(
        app_name=ss["app_name"],
        app_version=ss.get("app_version"),
        window_title=ss["window_title"],
        captured_at=int(ss.get("captured_at", 0)),
        focus=FocusElement(
            name=focus.get("name", ""),
            role=focus.get("role", ""),
            control_type=focus.get("control_type"),
            value=focus.get("value"),
            shortcut=focus.get("shortcut"),
            help_text=focus.get("help_text"),
            description=focus.get("description"),
            bounds=Rect(**bounds),
        ),
    )
    raster_data = data.get("screenshot", {})
    raster = RasterSpec(
        width=int(raster_data.get("width", 640)),
        height=int(raster_data.get("height", 480)),
        background=tuple(raster_data.get("background", (240, 240, 240))),
        rects=[LabeledRect(x=r["x"], y=r["y"], w=r["w"], h=r["h"],
                           color=tuple(r.get("color", (200, 200, 200))),
                           label=r.get("label", ""))
               for r in raster_data.get("rects", [])],
    )
    return Frame(screen_state=state, raster=raster)


def trace_event_from_dict(data: Dict, default_at: int = 0) -> SRTraceEvent:
    return SRTraceEvent(at=int(data.get("at", default_at)),
                        kind=TraceKind(data["kind"]),
                        payload=data["payload"])


def script_from_dict(data: Dict) -> SimulatedDesktopScript:
    frames = [frame_from_dict(f) for f in data["frames"]]
    trace = [trace_event_from_dict(e) for e in data.get("trace", [])]
    return SimulatedDesktopScript(frames=frames, trace_script=trace)
