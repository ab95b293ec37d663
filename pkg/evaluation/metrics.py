"""
Scheduling Metrics

Proportional-fair score, Jain fairness index and selection statistics of an
evaluation run.
"""

from typing import Any, Dict, List, Sequence, Tuple
from dataclasses import dataclass, field

import numpy as np
import pandas as pd


class UndefinedMetricError(ValueError):
    """Metric has no value for the given input."""
    pass


def jfi(average_rates: np.ndarray) -> float:
    """Jain fairness index (sum R)^2 / (L sum R^2), in [1/L, 1]."""
    r = np.asarray(average_rates, dtype=np.float64)
    denom = r.size * np.sum(r * r)
    if r.size == 0 or denom == 0.0:
        raise UndefinedMetricError("Jain fairness index is undefined for an all-zero rate vector")
    return float(np.sum(r) ** 2 / denom)


def pf_score(rates: np.ndarray, average_rates: np.ndarray, selected: Sequence[int]) -> float:
    """sum over selected users of r_l / R_l (R before the slot's update)."""
    members = list(selected)
    return float(np.sum(np.asarray(rates)[members] / np.asarray(average_rates)[members]))


def selection_probability(selection: np.ndarray) -> np.ndarray:
    """Fraction of slots each user was scheduled; ``selection`` is (T, L) boolean."""
    selection = np.asarray(selection, dtype=bool)
    if selection.shape[0] == 0:
        raise UndefinedMetricError("Selection probability needs at least one slot")
    return selection.mean(axis=0)


def to_mbps(rate: float, bandwidth_mhz: float) -> float:
    """nats/s/Hz times bandwidth in MHz."""
    return rate * bandwidth_mhz


@dataclass
class MetricsReport:
    """
    Metrics of one replica.

    Per-slot arrays have one row per slot; ``final_jfi`` uses the average
    rates after the last slot.
    """
    victims: Tuple[int, ...]
    selected: List[Tuple[int, ...]]
    rates: np.ndarray
    pf_scores: np.ndarray
    slot_jfi: np.ndarray
    final_average_rates: np.ndarray
    replica: int = 0

    @property
    def num_slots(self) -> int:
        return self.rates.shape[0]

    @property
    def num_users(self) -> int:
        return self.rates.shape[1]

    @property
    def selection(self) -> np.ndarray:
        mask = np.zeros((self.num_slots, self.num_users), dtype=bool)
        for t, members in enumerate(self.selected):
            mask[t, list(members)] = True
        return mask

    @property
    def selection_probability(self) -> np.ndarray:
        return selection_probability(self.selection)

    @property
    def mean_rates(self) -> np.ndarray:
        return self.rates.mean(axis=0)

    @property
    def final_jfi(self) -> float:
        return jfi(self.final_average_rates)

    def victim_aggregates(self) -> Dict[str, float]:
        """Min and mean over victims of selection probability and mean rate."""
        if not self.victims:
            nan = float("nan")
            return {
                "victim_min_selection": nan,
                "victim_mean_selection": nan,
                "victim_min_rate": nan,
                "victim_mean_rate": nan,
            }
        vic = list(self.victims)
        prob = self.selection_probability[vic]
        rate = self.mean_rates[vic]
        return {
            "victim_min_selection": float(prob.min()),
            "victim_mean_selection": float(prob.mean()),
            "victim_min_rate": float(rate.min()),
            "victim_mean_rate": float(rate.mean()),
        }

    def summary(self) -> Dict[str, float]:
        return {
            "mean_pf_score": float(self.pf_scores.mean()),
            "final_jfi": self.final_jfi,
            "mean_sum_rate": float(self.rates.sum(axis=1).mean()),
            **self.victim_aggregates(),
        }

    def slot_frame(self) -> pd.DataFrame:
        data: Dict[str, Any] = {
            "replica": self.replica,
            "slot": np.arange(self.num_slots),
            "selected": [" ".join(str(u) for u in s) for s in self.selected],
            "pf_score": self.pf_scores,
            "jfi": self.slot_jfi,
        }
        for user in range(self.num_users):
            data[f"rate_{user}"] = self.rates[:, user]
        return pd.DataFrame(data)


@dataclass
class ExperimentReport:
    """Replica reports of one configuration; summaries average over replicas."""
    replicas: List[MetricsReport]
    bandwidth_mhz: float = 20.0
    labels: Dict[str, Any] = field(default_factory=dict)

    def summary(self) -> Dict[str, Any]:
        per_replica = [r.summary() for r in self.replicas]
        keys = per_replica[0].keys()
        out: Dict[str, Any] = dict(self.labels)
        for key in keys:
            out[key] = float(np.mean([s[key] for s in per_replica]))
        for key in ("mean_sum_rate", "victim_min_rate", "victim_mean_rate"):
            out[key.replace("rate", "mbps")] = to_mbps(out[key], self.bandwidth_mhz)
        out["num_replicas"] = len(self.replicas)
        return out

    @property
    def selection_probability(self) -> np.ndarray:
        return np.mean([r.selection_probability for r in self.replicas], axis=0)

    @property
    def mean_rates(self) -> np.ndarray:
        return np.mean([r.mean_rates for r in self.replicas], axis=0)

    def slot_frame(self) -> pd.DataFrame:
        return pd.concat([r.slot_frame() for r in self.replicas], ignore_index=True)

    def user_frame(self) -> pd.DataFrame:
        prob = self.selection_probability
        rates = self.mean_rates
        victims = set(self.replicas[0].victims)
        return pd.DataFrame({
            "user": np.arange(prob.shape[0]),
            "victim": [u in victims for u in range(prob.shape[0])],
            "selection_probability": prob,
            "mean_rate": rates,
            "mean_mbps": rates * self.bandwidth_mhz,
        })
