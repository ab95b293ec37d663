"""
Zero-forcing beamforming and achievable rates.

The base station builds its beamformer from the *reported* CSI while the
received SINR is evaluated on the *true* CSI:

    SINR_l = P |w_l^H h_l|^2 / (sigma^2 ||w_l||^2 + P sum_{j != l} |w_l^H h_j|^2)

Rates are ``log(1 + SINR)`` in nats per channel use throughout.
"""

from typing import Sequence
import logging

import numpy as np


logger = logging.getLogger(__name__)

CONDITION_THRESHOLD = 1e6


class SingularChannelError(ArithmeticError):
    """The Gram matrix of the selected CSI columns is (numerically) singular."""
    pass


def zf_beamformer(reported_csi: np.ndarray) -> np.ndarray:
    """W = H (H^H H)^-1 for an M x N reported CSI subset with N <= M."""
    h = np.asarray(reported_csi, dtype=np.complex128)
    if h.ndim != 2:
        raise SingularChannelError(f"Expected an M x N matrix, got shape {h.shape}")
    m, n = h.shape
    if n == 0 or n > m:
        raise SingularChannelError(f"Cannot zero-force {n} streams with {m} antennas")
    gram = h.conj().T @ h
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > CONDITION_THRESHOLD:
        raise SingularChannelError(f"Gram matrix condition number {cond:.3g} exceeds {CONDITION_THRESHOLD:g}")
    # LAPACK gesv: LU with partial pivoting
    return h @ np.linalg.solve(gram, np.eye(n, dtype=np.complex128))


def _rates_from_beamformer(
    w: np.ndarray, true_cols: np.ndarray, tx_power: float, noise_variance: float
) -> np.ndarray:
    # gains[l, j] = w_l^H h_j
    gains = w.conj().T @ true_cols
    power = np.abs(gains) ** 2
    signal = tx_power * np.diag(power)
    interference = tx_power * (power.sum(axis=1) - np.diag(power))
    noise = noise_variance * np.sum(np.abs(w) ** 2, axis=0)
    return np.log1p(signal / (noise + interference))


def sinr_and_rates(
    true_csi: np.ndarray,
    reported_csi: np.ndarray,
    selected: Sequence[int],
    tx_power: float,
    noise_variance: float,
) -> np.ndarray:
    """Rates of the ``selected`` users (in the given order); zeros when ZF is infeasible."""
    selected = list(selected)
    if not selected:
        raise ValueError("At least one user must be selected")
    try:
        w = zf_beamformer(np.asarray(reported_csi)[:, selected])
    except SingularChannelError as e:
        logger.debug(f"Selection {selected} infeasible: {e}")
        return np.zeros(len(selected))
    return _rates_from_beamformer(w, np.asarray(true_csi)[:, selected], tx_power, noise_variance)


def batched_zf_rates(
    csi: np.ndarray,
    members: np.ndarray,
    tx_power: float,
    noise_variance: float,
) -> np.ndarray:
    """ZF rates for many equal-size selections at once, truthful CSI.

    ``members`` is an (n, k) integer array; returns (n, k) rates with rows of
    zeros for ill-conditioned selections.
    """
    members = np.asarray(members, dtype=int)
    n, k = members.shape
    m = csi.shape[0]
    if k > m:
        return np.zeros((n, k))
    h = np.transpose(csi[:, members], (1, 0, 2))  # (n, M, k)
    gram = np.conj(np.swapaxes(h, -1, -2)) @ h
    cond = np.linalg.cond(gram)
    ok = np.isfinite(cond) & (cond <= CONDITION_THRESHOLD)
    rates = np.zeros((n, k))
    if not np.any(ok):
        return rates
    # With truthful CSI the interference vanishes: SINR_l = P / (sigma^2 [(H^H H)^-1]_ll)
    inv = np.linalg.inv(gram[ok])
    diag = np.real(np.diagonal(inv, axis1=-2, axis2=-1))
    rates[ok] = np.log1p(tx_power / (noise_variance * diag))
    return rates


def single_user_max_rate(h: np.ndarray, tx_power: float, noise_variance: float) -> float:
    """log(1 + P ||h||^2 / sigma^2)."""
    h = np.asarray(h, dtype=np.complex128)
    return float(np.log1p(tx_power * np.vdot(h, h).real / noise_variance))


def max_rates(csi: np.ndarray, tx_power: float, noise_variance: float) -> np.ndarray:
    """Single-user max rate of every column of ``csi``."""
    gains = np.sum(np.abs(csi) ** 2, axis=0)
    return np.log1p(tx_power * gains / noise_variance)


def matched_filter_rates(csi: np.ndarray, tx_power: float, noise_variance: float) -> np.ndarray:
    """Rates when every user is served by its own matched filter, all others interfering."""
    csi = np.asarray(csi, dtype=np.complex128)
    norms = np.linalg.norm(csi, axis=0)
    rates = np.zeros(csi.shape[1])
    active = norms > 0.0
    if not np.any(active):
        return rates
    w = np.zeros_like(csi)
    w[:, active] = csi[:, active] / norms[active]
    power = np.abs(w.conj().T @ csi) ** 2
    signal = tx_power * np.diag(power)
    interference = tx_power * (power.sum(axis=1) - np.diag(power))
    sinr = np.where(active, signal / (noise_variance + interference), 0.0)
    rates[active] = np.log1p(sinr[active])
    return rates


def correlation_matrix(csi: np.ndarray) -> np.ndarray:
    """|h_i^H h_j| / (||h_i|| ||h_j||), zero for all-zero columns."""
    norms = np.linalg.norm(csi, axis=0)
    safe = np.where(norms > 0.0, norms, 1.0)
    corr = np.abs(csi.conj().T @ csi) / np.outer(safe, safe)
    corr[norms == 0.0, :] = 0.0
    corr[:, norms == 0.0] = 0.0
    return corr
