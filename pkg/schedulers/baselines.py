"""
Non-learning baselines: random choice, exhaustive PF and sum-rate search,
and correlation-based user grouping.

Exhaustive search evaluates ZF rates of every action on the reported CSI
and keeps the first maximum, so ties go to the smaller action index.
"""

from math import comb
from typing import List, Sequence
import logging

import numpy as np

from channel import batched_zf_rates, correlation_matrix, max_rates, sinr_and_rates
from mdp.actions import action_count, all_subsets, encode_action
from .base import PolicyKind, Scheduler, SlotContext


logger = logging.getLogger(__name__)

CORRELATION_THRESHOLD = 0.5


def random_policy(rng: np.random.Generator, num_actions: int) -> int:
    """Uniform over all actions."""
    return int(rng.integers(num_actions))


def action_rates(
    reported_csi: np.ndarray,
    num_users: int,
    max_selected: int,
    tx_power: float,
    noise_variance: float,
) -> List[np.ndarray]:
    """ZF rates of every action, grouped by subset size (size 1 first)."""
    subsets = all_subsets(num_users, max_selected)
    out: List[np.ndarray] = []
    start = 0
    for size in range(1, max_selected + 1):
        members = np.array(subsets[start:start + comb(num_users, size)], dtype=int)
        out.append(batched_zf_rates(reported_csi, members, tx_power, noise_variance))
        start += members.shape[0]
    return out


def pf_scores(
    reported_csi: np.ndarray,
    average_rates: np.ndarray,
    num_users: int,
    max_selected: int,
    tx_power: float,
    noise_variance: float,
) -> np.ndarray:
    """sum_{l in S} r_l(S) / R_l for every action S."""
    if np.any(np.asarray(average_rates) <= 0):
        raise ValueError("Average rates must be positive")
    subsets = all_subsets(num_users, max_selected)
    scores = []
    offset = 0
    for rates in action_rates(reported_csi, num_users, max_selected, tx_power, noise_variance):
        members = np.array(subsets[offset:offset + rates.shape[0]], dtype=int)
        scores.append(np.sum(rates / average_rates[members], axis=1))
        offset += rates.shape[0]
    return np.concatenate(scores)


def sum_rate_scores(
    reported_csi: np.ndarray,
    num_users: int,
    max_selected: int,
    tx_power: float,
    noise_variance: float,
) -> np.ndarray:
    return np.concatenate([
        rates.sum(axis=1)
        for rates in action_rates(reported_csi, num_users, max_selected, tx_power, noise_variance)
    ])


def opt_pf(
    reported_csi: np.ndarray,
    average_rates: np.ndarray,
    tx_power: float,
    noise_variance: float,
    num_users: int,
    max_selected: int,
) -> int:
    scores = pf_scores(reported_csi, average_rates, num_users, max_selected, tx_power, noise_variance)
    return int(np.argmax(scores))


def opt_mr(
    reported_csi: np.ndarray,
    average_rates: np.ndarray,
    tx_power: float,
    noise_variance: float,
    num_users: int,
    max_selected: int,
) -> int:
    """Sum-rate maximizing action; ``average_rates`` is unused."""
    scores = sum_rate_scores(reported_csi, num_users, max_selected, tx_power, noise_variance)
    return int(np.argmax(scores))


def user_groups(
    reported_csi: np.ndarray,
    average_rates: np.ndarray,
    tx_power: float,
    noise_variance: float,
    max_selected: int,
) -> List[List[int]]:
    """
    Greedy grouping by single-user PF ratio.

    Users are visited in descending r_max / R order (stable for ties) and
    join the first group whose members all have correlation below 0.5 with
    them and which still has room; otherwise they open a new group.
    """
    ratios = max_rates(reported_csi, tx_power, noise_variance) / average_rates
    order = np.argsort(-ratios, kind="stable")
    corr = correlation_matrix(reported_csi)
    groups: List[List[int]] = []
    for user in order:
        user = int(user)
        for group in groups:
            if len(group) < max_selected and all(corr[user, g] < CORRELATION_THRESHOLD for g in group):
                group.append(user)
                break
        else:
            groups.append([user])
    return groups


def group_pf_score(
    reported_csi: np.ndarray,
    average_rates: np.ndarray,
    group: Sequence[int],
    tx_power: float,
    noise_variance: float,
) -> float:
    members = sorted(group)
    rates = sinr_and_rates(reported_csi, reported_csi, members, tx_power, noise_variance)
    return float(np.sum(rates / average_rates[members]))


def opt_pf_ug(
    reported_csi: np.ndarray,
    average_rates: np.ndarray,
    tx_power: float,
    noise_variance: float,
    num_users: int,
    max_selected: int,
) -> int:
    """Best-PF group out of the correlation-based user groups."""
    groups = user_groups(reported_csi, average_rates, tx_power, noise_variance, max_selected)
    best_action, best_score = -1, -np.inf
    for group in groups:
        action = encode_action(sorted(group), num_users, max_selected)
        score = group_pf_score(reported_csi, average_rates, group, tx_power, noise_variance)
        if score > best_score or (score == best_score and action < best_action):
            best_action, best_score = action, score
    return best_action


class RandomScheduler(Scheduler):
    kind = PolicyKind.RANDOM

    def __init__(self, num_users: int, max_selected: int, tx_power: float, noise_variance: float, seed: int = 0):
        super().__init__(num_users, max_selected, tx_power, noise_variance)
        self.num_actions = action_count(num_users, max_selected)
        self.rng = np.random.default_rng(seed)

    def select(self, context: SlotContext) -> int:
        return random_policy(self.rng, self.num_actions)


class OptPFScheduler(Scheduler):
    kind = PolicyKind.OPT_PF

    def select(self, context: SlotContext) -> int:
        return opt_pf(
            context.reported_csi, context.average_rates, self.tx_power, self.noise_variance,
            self.num_users, self.max_selected,
        )


class OptMRScheduler(Scheduler):
    kind = PolicyKind.OPT_MR

    def select(self, context: SlotContext) -> int:
        return opt_mr(
            context.reported_csi, context.average_rates, self.tx_power, self.noise_variance,
            self.num_users, self.max_selected,
        )


class OptPFUGScheduler(Scheduler):
    kind = PolicyKind.OPT_PF_UG

    def select(self, context: SlotContext) -> int:
        return opt_pf_ug(
            context.reported_csi, context.average_rates, self.tx_power, self.noise_variance,
            self.num_users, self.max_selected,
        )
