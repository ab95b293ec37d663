"""
Sweep and Comparison Runner

Expands one base configuration into cells (a delta grid, a list of
adversary counts, or a set of scheduler/attack scenarios), runs every cell
for every seed and tabulates the summaries. Cells are independent; with
``workers > 1`` they run in a process pool and the table is sorted so the
output does not depend on completion order. A failing cell is recorded with
its error and the run continues.
"""

from typing import Any, Dict, List, Optional, Tuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import logging

import pandas as pd

from agents.checkpoint import Checkpoint
from schedulers import MAX_EXHAUSTIVE_USERS
from shared.schemas.experiment import ExperimentConfig
from .harness import load_checkpoint, run_experiment


logger = logging.getLogger(__name__)

SUMMARY_METRICS = [
    "victim_mean_selection",
    "victim_min_selection",
    "victim_mean_rate",
    "victim_min_rate",
    "victim_mean_mbps",
    "victim_min_mbps",
    "mean_pf_score",
    "final_jfi",
    "mean_sum_rate",
    "mean_sum_mbps",
]

COMPARE_SCENARIOS: Tuple[Tuple[str, str], ...] = (
    ("random", "none"),
    ("opt_pf", "none"),
    ("opt_mr", "none"),
    ("opt_pf_ug", "none"),
    ("sac", "none"),
    ("sac", "noise"),
    ("sac", "spgd"),
    ("sac", "fggm"),
)


@dataclass(frozen=True)
class Cell:
    """One configuration of a sweep, identified by its labels."""
    labels: Tuple[Tuple[str, Any], ...]
    update: Tuple[Tuple[str, Any], ...]
    seed: int


@dataclass
class SweepResult:
    rows: pd.DataFrame
    cells: pd.DataFrame

    @property
    def failures(self) -> pd.DataFrame:
        return self.rows[self.rows["error"] != ""]


def _with(config: ExperimentConfig, **update: Any) -> ExperimentConfig:
    return ExperimentConfig(**{**config.model_dump(), **update})


def sweep_cells(config: ExperimentConfig) -> List[Cell]:
    sweep = config.sweep_config()
    seeds = [config.seed + i for i in range(sweep.seeds)]
    cells: List[Cell] = []
    if sweep.axis == "delta_grid":
        for d_adv in sweep.delta_grid:
            for d_vic in sweep.delta_grid:
                labels = (("delta_adv", d_adv), ("delta_vic", d_vic))
                cells.extend(Cell(labels, labels, s) for s in seeds)
    else:
        for count in sweep.adversary_counts:
            labels = (("num_adversaries", count),)
            update = (("num_adversaries", count), ("adversaries", None))
            cells.extend(Cell(labels, update, s) for s in seeds)
    return cells


def compare_cells(config: ExperimentConfig) -> List[Cell]:
    cells = []
    for policy, scheme in COMPARE_SCENARIOS:
        labels = (("policy", policy), ("attack_scheme", scheme))
        cells.append(Cell(labels, labels, config.seed))
    return cells


def _run_cell(args: Tuple[ExperimentConfig, Cell, Optional[Checkpoint]]) -> Dict[str, Any]:
    base, cell, checkpoint = args
    row: Dict[str, Any] = {**dict(cell.labels), "seed": cell.seed, "error": ""}
    try:
        config = _with(base, seed=cell.seed, attack_result_path=None, **dict(cell.update))
        if config.policy in ("opt_pf", "opt_mr") and config.num_users > MAX_EXHAUSTIVE_USERS:
            raise ValueError(f"{config.policy} skipped: L={config.num_users} > {MAX_EXHAUSTIVE_USERS}")
        summary = run_experiment(config, checkpoint=checkpoint).summary()
        row.update({k: summary[k] for k in SUMMARY_METRICS})
    except Exception as e:
        logger.warning(f"Cell {dict(cell.labels)} seed {cell.seed} failed: {e}")
        row["error"] = f"{type(e).__name__}: {e}"
        row.update({k: float("nan") for k in SUMMARY_METRICS})
    return row


def _execute(config: ExperimentConfig, cells: List[Cell], checkpoint: Optional[Checkpoint]) -> pd.DataFrame:
    jobs = [(config, cell, checkpoint) for cell in cells]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_cell, jobs))
    else:
        rows = [_run_cell(job) for job in jobs]
    label_cols = list(dict(cells[0].labels)) if cells else []
    columns = label_cols + ["seed"] + SUMMARY_METRICS + ["error"]
    frame = pd.DataFrame(rows, columns=columns)
    return frame.sort_values(label_cols + ["seed"], kind="stable").reset_index(drop=True)


def _aggregate(rows: pd.DataFrame, label_cols: List[str]) -> pd.DataFrame:
    ok = rows[rows["error"] == ""]
    cells = ok.groupby(label_cols, sort=True)[SUMMARY_METRICS].mean().reset_index()
    counts = ok.groupby(label_cols, sort=True).size().reset_index(name="num_seeds")
    return cells.merge(counts, on=label_cols)


def sweep(config: ExperimentConfig, checkpoint: Optional[Checkpoint] = None) -> SweepResult:
    """One run per grid cell per seed; per-cell means over successful seeds."""
    checkpoint = load_checkpoint(config, checkpoint)
    cells = sweep_cells(config)
    logger.info(f"Sweep {config.name}: axis={config.sweep_axis}, {len(cells)} runs")
    rows = _execute(config, cells, checkpoint)
    label_cols = list(dict(cells[0].labels))
    return SweepResult(rows=rows, cells=_aggregate(rows, label_cols))


def compare(config: ExperimentConfig, checkpoint: Optional[Checkpoint] = None) -> pd.DataFrame:
    """Every scheduler without attack, then the SAC scheduler under each attack."""
    checkpoint = load_checkpoint(_with(config, policy="sac"), checkpoint)
    cells = compare_cells(config)
    logger.info(f"Compare {config.name}: {len(cells)} scenarios")
    rows = _execute(config, cells, checkpoint)
    order = {scenario: i for i, scenario in enumerate(COMPARE_SCENARIOS)}
    rows["_order"] = [order[(p, s)] for p, s in zip(rows["policy"], rows["attack_scheme"])]
    return rows.sort_values("_order", kind="stable").drop(columns="_order").reset_index(drop=True)
