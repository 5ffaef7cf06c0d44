"""Shared fixture builders for the engine test suite."""
from __future__ import annotations

import json
from pathlib import Path
from typing import List, Optional, Sequence

import pytest

from srassist.config import EngineConfig
from srassist.context import FocusElement, Rect, ScreenState
from srassist.engine import Engine, build_engine
from srassist.gateway import (CompletionProvider, HashingTestEmbedder,
                              MockCompletionProvider, ModelResponse,
                              ScriptRule, Usage, count_tokens)
from srassist.platform_sim import (Frame, RasterSpec, SimulatedDesktop,
                                   SimulatedDesktopScript)

SCENARIOS_DIR = Path(__file__).resolve().parents[1] / "src/srassist/scenarios"


def make_state(app: str = "TestApp", title: str = "Main Window",
               name: str = "OK", role: str = "button",
               bounds: tuple = (10, 10, 50, 20), version: str = "1.0",
               **focus_kwargs) -> ScreenState:
    return ScreenState(
        app_name=app, app_version=version, window_title=title, captured_at=0,
        focus=FocusElement(name=name, role=role, bounds=Rect(*bounds),
                           **focus_kwargs))


def make_frame(state: Optional[ScreenState] = None, width: int = 100,
               height: int = 100) -> Frame:
    return Frame(screen_state=state or make_state(),
                 raster=RasterSpec(width=width, height=height,
                                   background=(255, 255, 255)))


def make_desktop(frames: Optional[List[Frame]] = None) -> SimulatedDesktop:
    return SimulatedDesktop(SimulatedDesktopScript(
        frames=frames or [make_frame()]))


def make_engine(rules: Optional[Sequence[ScriptRule]] = None,
                default: str = "1. Press Tab to move to the next control.",
                frames: Optional[List[Frame]] = None,
                kb=None, config: Optional[EngineConfig] = None,
                provider: Optional[CompletionProvider] = None) -> Engine:
    provider = provider or MockCompletionProvider(rules=rules or [],
                                                  default_response=default)
    return build_engine(adapter=make_desktop(frames), provider=provider,
                        kb=kb, config=config)


class QueueProvider(CompletionProvider):
    """Returns prepared response texts in order; deterministic usage."""

    provider_id = "queue"

    def __init__(self, texts: Sequence[str]) -> None:
        self.texts = list(texts)
        self.calls: List[str] = []
        self._cursor = 0

    def complete(self, request, cancel=None) -> ModelResponse:
        serialized = request.prompt.serialized_text()
        self.calls.append(serialized)
        text = self.texts[self._cursor % len(self.texts)]
        self._cursor += 1
        return ModelResponse(text=text,
                             usage=Usage(input_tokens=count_tokens(serialized),
                                         output_tokens=count_tokens(text)),
                             latency_ms=0.0, provider_id=self.provider_id)


def numbered_steps(n: int, prefix: str = "Press Tab to reach control") -> str:
    return "\n".join(f"{i}. {prefix} {i}." for i in range(1, n + 1))


@pytest.fixture
def engine() -> Engine:
    return make_engine()


@pytest.fixture
def embedder() -> HashingTestEmbedder:
    return HashingTestEmbedder()
