"""
Evaluation harness, metrics, sweeps and report writers.

Usage:
    from evaluation import run_experiment, ExperimentReporter

    report = run_experiment(config)
    ExperimentReporter(Path("outputs")).write(report)
"""

from .metrics import (
    ExperimentReport,
    MetricsReport,
    UndefinedMetricError,
    jfi,
    pf_score,
    selection_probability,
    to_mbps,
)
from .harness import (
    ExperimentConfigError,
    build_threat,
    load_checkpoint,
    reported_csi,
    resolve_attack,
    run_experiment,
)
from .runner import COMPARE_SCENARIOS, SUMMARY_METRICS, SweepResult, compare, sweep, sweep_cells
from .reporters import ExperimentReporter, write_csv, write_json

__all__ = [
    "COMPARE_SCENARIOS",
    "ExperimentConfigError",
    "ExperimentReport",
    "ExperimentReporter",
    "MetricsReport",
    "SUMMARY_METRICS",
    "SweepResult",
    "UndefinedMetricError",
    "build_threat",
    "compare",
    "jfi",
    "load_checkpoint",
    "pf_score",
    "reported_csi",
    "resolve_attack",
    "run_experiment",
    "selection_probability",
    "sweep",
    "sweep_cells",
    "to_mbps",
    "write_csv",
    "write_json",
]
