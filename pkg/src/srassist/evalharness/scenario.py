"""Scenario fixture schema and loading."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..errors import ScenarioError


@dataclass
class ScriptStep:
    """Desktop advancement applied at a point in the replay."""
    advance_frames: int = 0
    trace: List[Dict[str, Any]] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "ScriptStep":
        if not data:
            return cls()
        return cls(advance_frames=int(data.get("advance_frames", 0)),
                   trace=list(data.get("trace", [])))


@dataclass
class Followup:
    question: str
    before: ScriptStep = field(default_factory=ScriptStep)


@dataclass
class AdaptiveRound:
    before: ScriptStep = field(default_factory=ScriptStep)
    after: ScriptStep = field(default_factory=ScriptStep)


@dataclass
class Predicate:
    kind: str  # guidance_regex | frame_field | trace_contains
    pattern: str = ""
    field: str = ""
    payload: str = ""

    VALID_KINDS = ("guidance_regex", "frame_field", "trace_contains")

    def __post_init__(self) -> None:
        if self.kind not in self.VALID_KINDS:
            raise ScenarioError(f"unknown predicate kind {self.kind!r}")
        if self.kind in ("guidance_regex", "frame_field"):
            try:
                re.compile(self.pattern)
            except re.error as exc:
                raise ScenarioError(f"bad predicate pattern: {exc}") from exc


@dataclass
class TaskScenario:
    name: str
    app: str
    task_description: str  # entered verbatim as the first question
    desktop: Dict[str, Any]
    model: Dict[str, Any]
    success: List[Predicate]
    max_adaptive_rounds: int = 3
    kb_docs: List[Dict[str, Any]] = field(default_factory=list)
    followups: List[Followup] = field(default_factory=list)
    after_qa: ScriptStep = field(default_factory=ScriptStep)
    adaptive_rounds: List[AdaptiveRound] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.max_adaptive_rounds < 0:
            raise ScenarioError("max_adaptive_rounds must be >= 0")
        if not self.task_description:
            raise ScenarioError("task_description must be non-empty")
        if not self.desktop.get("frames"):
            raise ScenarioError("desktop script needs at least one frame")


def scenario_from_dict(data: Dict[str, Any]) -> TaskScenario:
    try:
        return TaskScenario(
            name=data["name"],
            app=data.get("app", ""),
            task_description=data["task_description"],
            desktop=data["desktop"],
            model=data.get("model", {}),
            success=[Predicate(**p) for p in data.get("success", [])],
            max_adaptive_rounds=int(data.get("max_adaptive_rounds", 3)),
            kb_docs=list(data.get("kb_docs", [])),
            followups=[Followup(question=f["question"],
                                before=ScriptStep.from_dict(f.get("before")))
                       for f in data.get("followups", [])],
            after_qa=ScriptStep.from_dict(data.get("after_qa")),
            adaptive_rounds=[AdaptiveRound(
                before=ScriptStep.from_dict(r.get("before")),
                after=ScriptStep.from_dict(r.get("after")))
                for r in data.get("adaptive_rounds", [])],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad scenario fixture: {exc}") from exc


def load_scenario(path: str | Path) -> TaskScenario:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    return scenario_from_dict(data)
