"""
Experiment tracking for training runs.
"""

from .tracker import CURVE_COLUMNS, CurvePoint, TrainingTracker

__all__ = ["CURVE_COLUMNS", "CurvePoint", "TrainingTracker"]
