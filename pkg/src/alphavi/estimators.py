"""Self-normalized importance-sampling gradient estimators.

Each estimator combines per-draw log weights ``log w_k = log p(x, z_k) -
log q(z_k)`` with the kernels from :mod:`alphavi.variational`:

* renyi: ``-sum v_k (A_k - B_k)`` with ``v = snis((1 - alpha) log w)``;
  targets ``R_alpha(q || p)``.
* rws: ``+sum wn_k S_k``; targets ``KL(p || q)``.
* stl: ``-sum wn_k (A_k - P_k)``; targets ``KL(p || q)``.
* chivi: ``-sum (w_k / max w)^2 (A_k - B_k)``; targets ``chi^2(p || q)``.
* drep: ``-sum wn_k^2 (A_k - P_k)``; targets ``chi^2(p || q)``.

Here ``wn = snis(log w)``. ``raw`` is kept exactly as written above. In
expectation the renyi, stl and drep rows point along the divergence gradient
while rws and chivi point against it, so ``descent = sign * raw`` with ``sign = -1`` for the former and
``+1`` for the latter. ``descent`` is always a direction along which the
target divergence decreases; the optimizer ascends it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numeric import RandomStream, chivi_weights, ess, log_sum_exp, snis_weights
from .variational import (KernelSet, VariationalParams, gradient_kernels, log_density,
                          log_density_from_eps, sample)

KINDS = ("renyi", "rws", "stl", "chivi", "drep")
TARGET_DIVERGENCE = {
    "renyi": "renyi-alpha",
    "rws": "kl-inclusive",
    "stl": "kl-inclusive",
    "chivi": "chi-squared",
    "drep": "chi-squared",
}
DESCENT_SIGN = {"renyi": -1.0, "rws": 1.0, "stl": -1.0, "chivi": 1.0, "drep": -1.0}


class EstimationFailure(RuntimeError):
    """Raised when no draw carries finite importance weight."""


@dataclass(frozen=True)
class EstimatorKind:
    tag: str
    alpha: float = 0.5

    def __post_init__(self):
        if self.tag not in KINDS:
            raise ValueError(f"unknown estimator {self.tag!r}; choose from {KINDS}")
        if self.tag == "renyi" and (self.alpha <= 0 or self.alpha == 1):
            raise ValueError("renyi needs alpha > 0 and alpha != 1")

    @property
    def divergence(self) -> str:
        return TARGET_DIVERGENCE[self.tag]

    @property
    def sign(self) -> float:
        return DESCENT_SIGN[self.tag]

    def __str__(self):
        return f"renyi{self.alpha:g}" if self.tag == "renyi" else self.tag


def as_kind(kind) -> EstimatorKind:
    return kind if isinstance(kind, EstimatorKind) else EstimatorKind(str(kind))


@dataclass(frozen=True)
class GradientEstimate:
    raw: np.ndarray
    descent: np.ndarray
    ess: float
    max_weight: float
    top2_mass: float
    log_normalizer: float


def combine(kind, log_w, kernels: KernelSet) -> np.ndarray:
    """Raw estimator direction from log weights and kernels (no sampling)."""
    kind = as_kind(kind)
    log_w = np.asarray(log_w, dtype=float)
    tag = kind.tag
    if tag == "renyi":
        v = snis_weights((1.0 - kind.alpha) * log_w)
        return -(v @ (kernels.A - kernels.B))
    if tag == "chivi":
        return -(chivi_weights(log_w) @ (kernels.A - kernels.B))
    wn = snis_weights(log_w)
    if tag == "rws":
        return wn @ kernels.S
    if tag == "stl":
        return -(wn @ (kernels.A - kernels.P))
    return -((wn * wn) @ (kernels.A - kernels.P))


def log_weights(q: VariationalParams, target, z) -> np.ndarray:
    return target.log_joint(z) - log_density(q, z)


def _diagnostics(log_w):
    wn = snis_weights(log_w)
    top = np.sort(wn)[::-1]
    return (ess(wn), float(top[0]), float(top[:2].sum()),
            log_sum_exp(log_w) - np.log(log_w.size))


def estimate(kind, q: VariationalParams, target, K: int, stream: RandomStream) -> GradientEstimate:
    """Draw ``K`` samples from ``q`` and return one gradient estimate."""
    kind = as_kind(kind)
    if K < 1:
        raise ValueError("K must be >= 1")
    draw = sample(q, stream, K)
    log_w = target.log_joint(draw.z) - log_density_from_eps(q, draw.eps)
    if np.any(np.isnan(log_w)) or not np.any(np.isfinite(log_w)):
        raise EstimationFailure("no draw has finite log weight")
    kernels = gradient_kernels(q, draw, target)
    raw = combine(kind, log_w, kernels)
    ess_, wmax, top2, log_z = _diagnostics(log_w)
    return GradientEstimate(raw, kind.sign * raw, ess_, wmax, top2, log_z)


def weight_spectrum(q: VariationalParams, target, K: int, stream: RandomStream, top: int = 10) -> np.ndarray:
    """The ``top`` largest normalized importance weights of ``K`` draws, descending."""
    if not 1 <= top <= K:
        raise ValueError("need K >= top >= 1")
    draw = sample(q, stream, K)
    log_w = log_weights(q, target, draw.z)
    wn = snis_weights(log_w)
    return np.sort(wn)[::-1][:top]
