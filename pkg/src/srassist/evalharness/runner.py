"""Replays scenarios against a fully scripted engine and aggregates metrics.

Replay protocol per task: one contextual Q&A with the verbatim task
description (plus any scripted follow-up questions), then adaptive support
rounds while the success predicate fails, bounded by max_adaptive_rounds.
"""
from __future__ import annotations

import json
import re
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..engine import Engine, engine_from_fixtures
from ..errors import ScenarioError
from ..events import GENERATING_FINISHED
from ..kb.build import build_knowledge_base
from ..kb.chunking import document_from_dict
from ..platform_sim import SimulatedDesktop, trace_event_from_dict
from .scenario import Predicate, ScriptStep, TaskScenario, load_scenario


@dataclass
class CallRecord:
    feature: str
    latency_ms: float
    wall_ms: float
    input_tokens: int
    output_tokens: int
    cost: float


@dataclass
class TaskRecord:
    name: str
    success: bool
    qa_rounds: int
    adaptive_rounds: int
    calls: List[CallRecord] = field(default_factory=list)

    @property
    def first_try(self) -> bool:
        return self.success and self.adaptive_rounds == 0


@dataclass
class RunReport:
    tasks: List[TaskRecord]
    aggregate: Dict[str, Any]


def _apply(step: ScriptStep, engine: Engine) -> None:
    adapter = engine.adapter
    assert isinstance(adapter, SimulatedDesktop)
    if step.advance_frames:
        adapter.advance(step.advance_frames)
    last_at = engine.store.trace.last_at()
    default_at = (last_at + 1) if last_at is not None else 0
    for i, event_data in enumerate(step.trace):
        adapter.deliver_trace_event(
            trace_event_from_dict(event_data, default_at=default_at + i))


def _evaluate(predicates: List[Predicate], engine: Engine,
              last_guidance_text: str) -> bool:
    adapter = engine.adapter
    assert isinstance(adapter, SimulatedDesktop)
    state = adapter.current_frame().screen_state
    for predicate in predicates:
        if predicate.kind == "guidance_regex":
            if not re.search(predicate.pattern, last_guidance_text):
                return False
        elif predicate.kind == "frame_field":
            value = state
            for part in predicate.field.split("."):
                value = getattr(value, part, None)
                if value is None:
                    break
            if value is None or not re.search(predicate.pattern, str(value)):
                return False
        elif predicate.kind == "trace_contains":
            events = engine.store.recent_trace(engine.store.trace.capacity)
            if not any(predicate.payload in e.payload for e in events):
                return False
    return True


def run_scenario(scenario: TaskScenario,
                 max_adaptive_override: Optional[int] = None) -> TaskRecord:
    kb = None
    if scenario.kb_docs:
        docs = [document_from_dict(d) for d in scenario.kb_docs]
        from ..gateway import HashingTestEmbedder
        kb, _ = build_knowledge_base(docs, HashingTestEmbedder())
    engine = engine_from_fixtures(scenario.desktop, scenario.model, kb=kb)

    wall_times: List[float] = []

    def on_event(event) -> None:
        if event.type == GENERATING_FINISHED and "wall_ms" in event.payload:
            wall_times.append(float(event.payload["wall_ms"]))

    engine.bus.subscribe(on_event)

    max_rounds = (scenario.max_adaptive_rounds if max_adaptive_override is None
                  else max_adaptive_override)

    last_text = engine.session.contextual_qa(scenario.task_description).raw_text
    qa_rounds = 1
    for followup in scenario.followups:
        _apply(followup.before, engine)
        last_text = engine.session.contextual_qa(followup.question).raw_text
        qa_rounds += 1
    _apply(scenario.after_qa, engine)

    success = _evaluate(scenario.success, engine, last_text)
    adaptive_rounds = 0
    while not success and adaptive_rounds < max_rounds:
        script = (scenario.adaptive_rounds[adaptive_rounds]
                  if adaptive_rounds < len(scenario.adaptive_rounds) else None)
        if script is not None:
            _apply(script.before, engine)
        last_text = engine.session.adaptive_support().raw_text
        adaptive_rounds += 1
        if script is not None:
            _apply(script.after, engine)
        success = _evaluate(scenario.success, engine, last_text)

    calls = []
    for i, record in enumerate(engine.ledger.records):
        calls.append(CallRecord(
            feature=record.feature, latency_ms=record.latency_ms,
            wall_ms=wall_times[i] if i < len(wall_times) else 0.0,
            input_tokens=record.input_tokens,
            output_tokens=record.output_tokens, cost=record.cost))
    engine.session.close()
    return TaskRecord(name=scenario.name, success=success,
                      qa_rounds=qa_rounds, adaptive_rounds=adaptive_rounds,
                      calls=calls)


def _stats(values: List[float]) -> Dict[str, float]:
    if not values:
        return {"mean": 0.0, "std": 0.0}
    return {"mean": statistics.fmean(values), "std": statistics.pstdev(values)}


def aggregate_tasks(tasks: List[TaskRecord]) -> Dict[str, Any]:
    """Suite-level metrics; scripted latency stands in for wall time."""
    total = len(tasks)
    first_try = sum(1 for t in tasks if t.first_try)
    overall = sum(1 for t in tasks if t.success)
    rescued = [t.adaptive_rounds for t in tasks
               if t.success and t.adaptive_rounds > 0]
    per_feature: Dict[str, Dict[str, List[float]]] = {}
    for task in tasks:
        for call in task.calls:
            bucket = per_feature.setdefault(call.feature, {
                "latency_ms": [], "cost": [],
                "input_tokens": [], "output_tokens": []})
            bucket["latency_ms"].append(call.latency_ms)
            bucket["cost"].append(call.cost)
            bucket["input_tokens"].append(float(call.input_tokens))
            bucket["output_tokens"].append(float(call.output_tokens))
    return {
        "task_count": total,
        "first_try_success_rate": first_try / total if total else 0.0,
        "overall_success_rate": overall / total if total else 0.0,
        "mean_adaptive_rounds_rescued":
            statistics.fmean(rescued) if rescued else "n/a",
        "per_feature": {
            feature: {metric: _stats(values)
                      for metric, values in sorted(buckets.items())}
            for feature, buckets in sorted(per_feature.items())
        },
    }


def run_suite(suite_dir: str | Path,
              max_adaptive_override: Optional[int] = None,
              parallel: int = 1) -> RunReport:
    paths = sorted(Path(suite_dir).glob("*.json"))
    if not paths:
        raise ScenarioError(f"no scenario fixtures in {suite_dir}")
    scenarios = [load_scenario(p) for p in paths]
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            tasks = list(pool.map(
                lambda s: run_scenario(s, max_adaptive_override), scenarios))
    else:
        tasks = [run_scenario(s, max_adaptive_override) for s in scenarios]
    return RunReport(tasks=tasks, aggregate=aggregate_tasks(tasks))


def report_to_dict(report: RunReport) -> Dict[str, Any]:
    return {"tasks": [asdict(t) | {"first_try": t.first_try}
                      for t in report.tasks],
            "aggregate": report.aggregate}


def report_from_dict(data: Dict[str, Any]) -> RunReport:
    tasks = [TaskRecord(name=t["name"], success=t["success"],
                        qa_rounds=t["qa_rounds"],
                        adaptive_rounds=t["adaptive_rounds"],
                        calls=[CallRecord(**c) for c in t.get("calls", [])])
             for t in data["tasks"]]
    return RunReport(tasks=tasks, aggregate=data["aggregate"])


def render_report(report: RunReport, format: str = "table") -> str:
    """Human table or machine JSON; built from scripted values only."""
    if format == "json":
        return json.dumps(_deterministic_view(report), indent=2, sort_keys=True)
    agg = report.aggregate
    lines = []
    lines.append(f"tasks: {agg['task_count']}")
    lines.append(f"first-try success rate: "
                 f"{agg['first_try_success_rate'] * 100:.1f}%")
    lines.append(f"overall success rate: "
                 f"{agg['overall_success_rate'] * 100:.1f}%")
    rescued = agg["mean_adaptive_rounds_rescued"]
    rescued_text = (f"{rescued:.2f}" if isinstance(rescued, float) else rescued)
    lines.append(f"mean adaptive rounds (rescued tasks): {rescued_text}")
    lines.append("")
    header = (f"{'feature':<20} {'latency ms':>16} {'cost':>18} "
              f"{'in tokens':>16} {'out tokens':>16}")
    lines.append(header)
    lines.append("-" * len(header))
    for feature, metrics in agg["per_feature"].items():
        def cell(metric: str, digits: int) -> str:
            stats = metrics[metric]
            return f"{stats['mean']:.{digits}f}±{stats['std']:.{digits}f}"
        lines.append(f"{feature:<20} {cell('latency_ms', 1):>16} "
                     f"{cell('cost', 6):>18} {cell('input_tokens', 1):>16} "
                     f"{cell('output_tokens', 1):>16}")
    return "\n".join(lines) + "\n"


def _deterministic_view(report: RunReport) -> Dict[str, Any]:
    """Report content with wall-clock fields removed."""
    data = report_to_dict(report)
    for task in data["tasks"]:
        for call in task["calls"]:
            call.pop("wall_ms", None)
    return data
