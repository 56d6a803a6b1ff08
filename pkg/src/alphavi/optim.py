"""Adam on descent directions."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    step_size: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n, step_size=0.01, **kw) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0, step_size, **kw)


def adam_step(state: AdamState, params, descent):
    """One Adam update treating ``-descent`` as the loss gradient.

    Returns ``(new_state, new_params)``.
    """
    params = np.asarray(params, dtype=float)
    g = -np.asarray(descent, dtype=float)
    if g.shape != params.shape:
        raise ValueError("descent and params differ in shape")
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("non-finite descent direction")
    t = state.t + 1
    m = state.beta1 * state.m + (1 - state.beta1) * g
    with np.errstate(over="ignore"):
        v = state.beta2 * state.v + (1 - state.beta2) * g * g
    if not np.all(np.isfinite(v)):
        raise FloatingPointError("second-moment estimate overflowed")
    m_hat = m / (1 - state.beta1 ** t)
    v_hat = v / (1 - state.beta2 ** t)
    new = params - state.step_size * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, m=m, v=v, t=t), new
