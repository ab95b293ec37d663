"""
Proportional-fair user-selection MDP.

``EnvState`` is an immutable value and ``step`` a pure transition:

    R[t+1] = (1 - beta) * r[t] + beta * R[t]       (r = 0 for unscheduled users)
    reward = sum_l r_l[t] / R_l[t]                  (R before the update)

Rates use the beamformer built from the reported CSI and the SINR of the
true CSI.
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple
import logging

import numpy as np

from channel import ChannelState, channel_state, sinr_and_rates
from shared.schemas.environment import EnvConfig
from .actions import decode_action
from .observation import build_observation


logger = logging.getLogger(__name__)

RATE_EPSILON = 0.01
RATE_FLOOR = float(np.finfo(np.float64).tiny)


class EnvDoneError(RuntimeError):
    """Stepping past the end of the channel trace."""
    pass


@dataclass(frozen=True)
class EnvState:
    config: EnvConfig
    trace: Tuple[ChannelState, ...]
    slot: int
    average_rates: np.ndarray

    @property
    def done(self) -> bool:
        return self.slot >= len(self.trace)

    @property
    def channel(self) -> ChannelState:
        if self.done:
            raise EnvDoneError(f"Trace exhausted at slot {self.slot}")
        return self.trace[self.slot]


def reset(config: EnvConfig, trace: Sequence[ChannelState]) -> EnvState:
    """Initial state at slot 0 with every average rate at RATE_EPSILON."""
    if not trace:
        raise ValueError("Environment needs a non-empty trace")
    m, l = trace[0].true_csi.shape
    if (m, l) != (config.num_antennas, config.num_users):
        raise ValueError(
            f"Trace is {m}x{l}, config expects {config.num_antennas}x{config.num_users}"
        )
    return EnvState(
        config=config,
        trace=tuple(trace),
        slot=0,
        average_rates=np.full(config.num_users, RATE_EPSILON),
    )


def observe(env: EnvState, reported_csi: Optional[np.ndarray] = None) -> np.ndarray:
    """Raw observation the base station builds from (possibly falsified) CSI."""
    channel = env.channel
    if reported_csi is not None:
        channel = channel_state(channel.slot, reported_csi, env.config.tx_power, env.config.noise_variance)
    return build_observation(channel, env.average_rates, env.config.tx_power, env.config.noise_variance)


def slot_rates(
    env: EnvState,
    selected: Sequence[int],
    reported_csi: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Per-user instantaneous rates (zeros for unscheduled users)."""
    true_csi = env.channel.true_csi
    reported = true_csi if reported_csi is None else reported_csi
    rates = np.zeros(env.config.num_users)
    rates[list(selected)] = sinr_and_rates(
        true_csi, reported, selected, env.config.tx_power, env.config.noise_variance
    )
    return rates


def step(
    env: EnvState,
    action: int,
    reported_csi: Optional[np.ndarray] = None,
) -> Tuple[EnvState, float, np.ndarray]:
    """Apply ``action`` in the current slot; returns (next state, reward, rates)."""
    cfg = env.config
    selected = decode_action(action, cfg.num_users, cfg.max_selected)
    rates = slot_rates(env, selected, reported_csi)
    previous = env.average_rates
    reward = float(np.sum(rates / previous))
    updated = (1.0 - cfg.beta) * rates + cfg.beta * previous
    # underflow guard only; starved users keep decaying geometrically
    updated = np.maximum(updated, RATE_FLOOR)
    return replace(env, slot=env.slot + 1, average_rates=updated), reward, rates
