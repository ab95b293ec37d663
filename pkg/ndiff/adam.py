"""Adam optimizer over lists of numpy arrays."""

from dataclasses import dataclass, field, replace
from typing import List, Sequence, Tuple

import numpy as np

from .graph import GraphError


@dataclass(frozen=True)
class AdamState:
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Tuple[np.ndarray, ...] = field(default_factory=tuple)
    v: Tuple[np.ndarray, ...] = field(default_factory=tuple)

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], lr: float = 3e-4, **kwargs) -> "AdamState":
        zeros = tuple(np.zeros_like(p, dtype=np.float64) for p in params)
        return cls(lr=lr, m=zeros, v=tuple(np.zeros_like(z) for z in zeros), **kwargs)


def adam_step(
    state: AdamState,
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
) -> Tuple[List[np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    if not (len(params) == len(grads) == len(state.m)):
        raise GraphError(
            f"Adam: {len(params)} params, {len(grads)} grads, {len(state.m)} moment slots"
        )
    t = state.step + 1
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != p.shape or m.shape != p.shape:
            raise GraphError(f"Adam: shape mismatch {p.shape} vs grad {g.shape}")
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1 ** t)
        v_hat = v / (1.0 - state.beta2 ** t)
        new_params.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, replace(state, step=t, m=tuple(new_m), v=tuple(new_v))
