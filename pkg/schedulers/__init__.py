"""
User-selection policies behind one interface.

Usage:
    from schedulers import create_scheduler, SlotContext

    scheduler = create_scheduler("opt_pf", num_users=8, max_selected=4,
                                 tx_power=10.0, noise_variance=1.0)
    action = scheduler.select(context)
"""

from .base import PolicyKind, Scheduler, SchedulerConfigError, SlotContext
from .baselines import (
    OptMRScheduler,
    OptPFScheduler,
    OptPFUGScheduler,
    RandomScheduler,
    opt_mr,
    opt_pf,
    opt_pf_ug,
    pf_scores,
    random_policy,
    sum_rate_scores,
    user_groups,
)
from .sac_policy import SacScheduler, sac_policy
from .registry import MAX_EXHAUSTIVE_USERS, create_scheduler

__all__ = [
    "MAX_EXHAUSTIVE_USERS",
    "OptMRScheduler",
    "OptPFScheduler",
    "OptPFUGScheduler",
    "PolicyKind",
    "RandomScheduler",
    "SacScheduler",
    "Scheduler",
    "SchedulerConfigError",
    "SlotContext",
    "create_scheduler",
    "opt_mr",
    "opt_pf",
    "opt_pf_ug",
    "pf_scores",
    "random_policy",
    "sac_policy",
    "sum_rate_scores",
    "user_groups",
]
