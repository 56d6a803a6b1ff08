"""Exact divergences between ``q = N(0, v I)`` and ``p = N(0, diag(s2))``.

Also the sample-based ``KL(p || q) + log p(x)`` metric and the
moment-matching baseline used for the logistic models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .variational import VariationalParams, log_density

DIVERGENCES = ("kl-exclusive", "kl-inclusive", "renyi-alpha", "chi-squared")


class DegenerateBaseline(ValueError):
    """Posterior samples have zero variance in some coordinate."""


@dataclass(frozen=True)
class DivergenceKind:
    tag: str
    alpha: float = 0.5

    def __post_init__(self):
        if self.tag not in DIVERGENCES:
            raise ValueError(f"unknown divergence {self.tag!r}")
        if self.tag == "renyi-alpha" and (self.alpha <= 0 or self.alpha == 1):
            raise ValueError("alpha must be in (0, 1) or (1, inf)")


def as_divergence(kind, alpha=0.5) -> DivergenceKind:
    return kind if isinstance(kind, DivergenceKind) else DivergenceKind(kind, alpha)


def log1p_chi_squared(v, variances) -> float:
    """``log(1 + chi^2(p || q))``; ``+inf`` outside ``v > max(s2) / 2``."""
    s2 = np.asarray(variances, dtype=float)
    if 2 * v <= s2.max():
        return math.inf
    return float(np.sum(math.log(v) - 0.5 * np.log(s2) - 0.5 * np.log(2 * v - s2)))


def divergence(kind, v: float, variances) -> float:
    """Closed-form divergence for isotropic variance ``v``.

    chi-squared returns ``+inf`` when ``2 v <= max(variances)`` (not integrable)
    or when the product overflows.
    """
    kind = as_divergence(kind)
    if v <= 0:
        raise ValueError("v must be positive")
    s2 = np.asarray(variances, dtype=float)
    if kind.tag == "kl-exclusive":
        return float(np.sum(0.5 * np.log(s2 / v) + v / (2 * s2) - 0.5))
    if kind.tag == "kl-inclusive":
        return float(np.sum(0.5 * np.log(v / s2) + s2 / (2 * v) - 0.5))
    if kind.tag == "renyi-alpha":
        a = kind.alpha
        ratio = (a * s2 + (1 - a) * v) / (v ** (1 - a) * s2 ** a)
        if np.any(ratio <= 0):
            return math.inf
        return float(np.sum(-np.log(ratio) / (2 * (a - 1))))
    log1p = log1p_chi_squared(v, s2)
    if log1p > 700:
        return math.inf
    return math.expm1(log1p)


def _objective(kind, variances):
    # chi-squared is minimized through log(1 + chi^2), which has the same argmin
    if kind.tag == "chi-squared":
        return lambda x: log1p_chi_squared(math.exp(x), variances)
    return lambda x: divergence(kind, math.exp(x), variances)


def golden_scale(kind, variances, tol=1e-8, grid=400) -> float:
    """Minimize the divergence over ``log v`` by a grid scan plus golden section."""
    kind = as_divergence(kind)
    s2 = np.asarray(variances, dtype=float)
    lo = math.log(s2.max() / 2) + 1e-6 if kind.tag == "chi-squared" else math.log(1e-3)
    hi = math.log(1e3)
    f = _objective(kind, s2)
    xs = np.linspace(lo, hi, grid)
    fs = np.array([f(x) for x in xs])
    i = int(np.argmin(fs))
    if i == 0 or i == grid - 1:
        return math.exp(xs[i])
    x = optimize.golden(f, brack=(xs[i - 1], xs[i], xs[i + 1]), tol=tol)
    return math.exp(float(x))


def optimal_scale(kind, variances) -> float:
    """Variance ``v*`` of the optimal isotropic ``q`` for a divergence."""
    kind = as_divergence(kind)
    s2 = np.asarray(variances, dtype=float)
    if kind.tag == "kl-exclusive":
        return float(s2.size / np.sum(1.0 / s2))
    if kind.tag == "kl-inclusive":
        return float(np.mean(s2))
    return golden_scale(kind, s2)


def kl_inclusive_up_to_const(posterior_samples, q: VariationalParams, target) -> float:
    """Monte Carlo ``KL(p || q) + log p(x)`` from posterior draws."""
    z = np.atleast_2d(np.asarray(posterior_samples, dtype=float))
    return float(np.mean(target.log_joint(z) - log_density(q, z)))


def moment_match(posterior_samples):
    """Per-coordinate mean and (1/M) variance: the diagonal-Gaussian KL(p || q) minimizer."""
    z = np.atleast_2d(np.asarray(posterior_samples, dtype=float))
    if z.shape[0] < 2:
        raise ValueError("need at least two samples")
    mean = z.mean(axis=0)
    var = z.var(axis=0)
    if np.any(var <= 0):
        raise DegenerateBaseline("zero sample variance in coordinate(s) "
                                 f"{np.flatnonzero(var <= 0).tolist()}")
    return mean, var
