"""Scenario loading, check execution and reports."""

from .scenario import Scenario, ScenarioValidator, load_scenario
from .catalog import ScenarioCatalog
from .monitoring import ResourceMonitor
from .runner import run
from .report import build_report, exit_code, render_summary, write_report

__all__ = [
    'Scenario',
    'ScenarioValidator',
    'load_scenario',
    'ScenarioCatalog',
    'ResourceMonitor',
    'run',
    'build_report',
    'exit_code',
    'render_summary',
    'write_report',
]
