"""
Report Writers

CSV tables through pandas with a fixed float format and JSON with sorted
keys, so identical runs produce byte-identical files.
"""

from typing import Any, Dict
from pathlib import Path
import json
import logging

import numpy as np
import pandas as pd

from .metrics import ExperimentReport


logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def write_json(data: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=True))
    return path


class ExperimentReporter:
    """Writes ``metrics.csv`` (slot level), ``users.csv``, ``summary.csv`` and ``summary.json``."""

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)

    def write(self, report: ExperimentReport) -> Dict[str, Path]:
        summary = pd.DataFrame([report.summary()])
        return {
            "metrics": write_csv(report.slot_frame(), self.output_dir / "metrics.csv"),
            "users": write_csv(report.user_frame(), self.output_dir / "users.csv"),
            "summary": write_csv(summary, self.output_dir / "summary.csv"),
            "summary_json": write_json(report.summary(), self.output_dir / "summary.json"),
        }
