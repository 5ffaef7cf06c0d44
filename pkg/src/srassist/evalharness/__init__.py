"""Scenario replay harness: scripted desktop + scripted model + reporting."""
from .runner import RunReport, TaskRecord, render_report, run_scenario, run_suite
from .scenario import TaskScenario, load_scenario

__all__ = ["RunReport", "TaskRecord", "TaskScenario", "load_scenario",
           "render_report", "run_scenario", "run_suite"]
