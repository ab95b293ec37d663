"""
Scheduler registry.

Maps a policy name from the experiment config to a scheduler instance and
refuses configurations the policy cannot serve.
"""

from typing import Dict, Optional, Type, Union
import logging

from agents.checkpoint import Checkpoint
from .base import PolicyKind, Scheduler, SchedulerConfigError
from .baselines import OptMRScheduler, OptPFScheduler, OptPFUGScheduler, RandomScheduler
from .sac_policy import SacScheduler


logger = logging.getLogger(__name__)

# Exhaustive search enumerates O(2^L) actions
MAX_EXHAUSTIVE_USERS = 16

_BASELINES: Dict[PolicyKind, Type[Scheduler]] = {
    PolicyKind.OPT_PF: OptPFScheduler,
    PolicyKind.OPT_MR: OptMRScheduler,
    PolicyKind.OPT_PF_UG: OptPFUGScheduler,
}


def create_scheduler(
    kind: Union[PolicyKind, str],
    *,
    num_users: int,
    max_selected: int,
    tx_power: float,
    noise_variance: float,
    checkpoint: Optional[Checkpoint] = None,
    seed: int = 0,
) -> Scheduler:
    """
    Build the scheduler for ``kind``.

    Example:
        scheduler = create_scheduler("opt_pf", num_users=8, max_selected=4,
                                     tx_power=10.0, noise_variance=1.0)
    """
    try:
        kind = PolicyKind(kind)
    except ValueError as e:
        valid = [k.value for k in PolicyKind]
        raise SchedulerConfigError(f"Unknown policy {kind!r}; expected one of {valid}") from e

    if kind in (PolicyKind.OPT_PF, PolicyKind.OPT_MR) and num_users > MAX_EXHAUSTIVE_USERS:
        raise SchedulerConfigError(
            f"{kind.value} enumerates every subset and is limited to L <= {MAX_EXHAUSTIVE_USERS}, got L={num_users}"
        )

    if kind == PolicyKind.SAC:
        if checkpoint is None:
            raise SchedulerConfigError("Policy 'sac' needs a checkpoint")
        scheduler: Scheduler = SacScheduler(checkpoint, num_users, max_selected, tx_power, noise_variance)
    elif kind == PolicyKind.RANDOM:
        scheduler = RandomScheduler(num_users, max_selected, tx_power, noise_variance, seed=seed)
    else:
        scheduler = _BASELINES[kind](num_users, max_selected, tx_power, noise_variance)

    logger.debug(f"Created scheduler {scheduler.get_metadata()}")
    return scheduler
