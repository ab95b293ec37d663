"""
Observation layout.

Each user contributes one block of ``2 + 2M`` reals:

    [gamma_l, R_l, Re h_1l, Im h_1l, ..., Re h_Ml, Im h_Ml]

gamma_l is the user's rate with every user transmitting (zero-forcing when
L <= M, matched filter otherwise) divided by its single-user max rate, clipped
to [0, 1].
"""

from typing import List, Sequence
import logging

import numpy as np

from channel import (
    ChannelState,
    matched_filter_rates,
    sinr_and_rates,
)


logger = logging.getLogger(__name__)

GAMMA_OFFSET = 0
RATE_OFFSET = 1
CSI_OFFSET = 2


def block_size(num_antennas: int) -> int:
    return 2 + 2 * num_antennas


def observation_dim(num_users: int, num_antennas: int) -> int:
    return num_users * block_size(num_antennas)


def user_dims(users: Sequence[int], num_antennas: int) -> List[int]:
    """All observation indices belonging to ``users`` (in the given order)."""
    size = block_size(num_antennas)
    return [u * size + j for u in users for j in range(size)]


def csi_dims(users: Sequence[int], num_antennas: int) -> List[int]:
    size = block_size(num_antennas)
    return [u * size + j for u in users for j in range(CSI_OFFSET, size)]


def rate_dims(users: Sequence[int], num_antennas: int) -> List[int]:
    """gamma and R indices of ``users``."""
    size = block_size(num_antennas)
    return [u * size + j for u in users for j in (GAMMA_OFFSET, RATE_OFFSET)]


def observed_rates(csi: np.ndarray, tx_power: float, noise_variance: float) -> np.ndarray:
    m, l = csi.shape
    if l <= m:
        return sinr_and_rates(csi, csi, range(l), tx_power, noise_variance)
    return matched_filter_rates(csi, tx_power, noise_variance)


def build_observation(
    channel: ChannelState,
    average_rates: np.ndarray,
    tx_power: float,
    noise_variance: float,
) -> np.ndarray:
    """Flat observation vector of length L * (2 + 2M)."""
    csi = channel.true_csi
    m, l = csi.shape
    rates = observed_rates(csi, tx_power, noise_variance)
    max_rate = channel.max_rates
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.where(max_rate > 0.0, rates / np.where(max_rate > 0.0, max_rate, 1.0), 0.0)
    gamma = np.clip(gamma, 0.0, 1.0)

    blocks = np.empty((l, block_size(m)))
    blocks[:, GAMMA_OFFSET] = gamma
    blocks[:, RATE_OFFSET] = average_rates
    interleaved = np.stack([csi.real, csi.imag], axis=-1)  # (M, L, 2)
    blocks[:, CSI_OFFSET:] = np.transpose(interleaved, (1, 0, 2)).reshape(l, 2 * m)
    return blocks.reshape(-1)


def csi_from_blocks(blocks: np.ndarray, num_antennas: int) -> np.ndarray:
    """Recover the M x n CSI matrix from n concatenated user blocks."""
    size = block_size(num_antennas)
    blocks = np.asarray(blocks, dtype=np.float64).reshape(-1, size)
    pairs = blocks[:, CSI_OFFSET:].reshape(-1, num_antennas, 2)
    return (pairs[..., 0] + 1j * pairs[..., 1]).T
