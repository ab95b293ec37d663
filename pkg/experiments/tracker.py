"""
Training Tracker

Collects the SAC training curve and optionally mirrors it to MLflow.
"""

from typing import Any, Dict, List, Optional
from dataclasses import dataclass, field
from contextlib import contextmanager
from pathlib import Path
import logging

import pandas as pd


logger = logging.getLogger(__name__)

CURVE_COLUMNS = [
    "step",
    "episode",
    "reward",
    "critic_loss",
    "actor_loss",
    "temperature_loss",
    "temperature",
    "entropy",
]


@dataclass
class CurvePoint:
    """One logged point of the training curve."""
    step: int
    episode: int
    reward: float
    losses: Dict[str, float] = field(default_factory=dict)

    def to_row(self) -> Dict[str, Any]:
        row = {"step": self.step, "episode": self.episode, "reward": self.reward}
        for name in CURVE_COLUMNS[3:]:
            row[name] = self.losses.get(name, float("nan"))
        return row


class TrainingTracker:
    """
    Track a training run.

    Usage:
        tracker = TrainingTracker(run_name="sac_l8", mlflow_tracking=False)
        with tracker.run(seed=0):
            checkpoint = train(factory, sac_config, env_config, tracker=tracker)
        tracker.write_csv(Path("outputs/training_curve.csv"))
    """

    def __init__(self, run_name: str = "fggm_lab", mlflow_tracking: bool = False):
        self.run_name = run_name
        self.mlflow_tracking = mlflow_tracking
        self.points: List[CurvePoint] = []
        self.mlflow = None
        self._init_mlflow()

    def _init_mlflow(self):
        """Initialize MLflow if requested and available."""
        if self.mlflow_tracking:
            try:
                import mlflow
                self.mlflow = mlflow
                self.mlflow.set_experiment("fggm_lab_training")
            except ImportError:
                logger.warning("MLflow not available; install the 'tracking' extra to mirror metrics")
                self.mlflow_tracking = False

    @contextmanager
    def run(self, **params):
        """Scope one training run; parameters are logged to MLflow when enabled."""
        if not self.mlflow_tracking:
            yield self
            return
        with self.mlflow.start_run(run_name=self.run_name):
            for key, value in params.items():
                self.mlflow.log_param(key, value)
            yield self

    def log_step(self, step: int, episode: int, reward: float, losses: Dict[str, float]) -> None:
        point = CurvePoint(step=step, episode=episode, reward=float(reward), losses=dict(losses))
        self.points.append(point)
        if self.mlflow_tracking:
            metrics = {"reward": point.reward, **{k: float(v) for k, v in losses.items()}}
            self.mlflow.log_metrics(metrics, step=step)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([p.to_row() for p in self.points], columns=CURVE_COLUMNS)

    def write_csv(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.10g")
        logger.info(f"Wrote training curve ({len(self.points)} points) to {path}")
        return path

    @property
    def last(self) -> Optional[CurvePoint]:
        return self.points[-1] if self.points else None
