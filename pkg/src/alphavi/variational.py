"""Gaussian variational family and per-draw parameter-gradient kernels.

Parameters are the mean and the log-scale ``lam = log(sigma)``. The flat
parameter vector is ``[mean, lam]`` in diagonal mode and ``[lam]`` in
isotropic mode (zero mean, one shared scale).

Four kernels cover every gradient the estimators need, each a
``(K, n_params)`` array for a batch of draws ``z = mean + exp(lam) * eps``:

``A``  path gradient of ``log p(x, z_phi)``
``P``  path gradient of ``log q_psi(z_phi)`` with the density frozen
``S``  score ``d/dphi log q_phi(z)`` at fixed ``z``
``B``  ``P + S``, the total derivative of ``log q_phi(z_phi)``; this is
       ``0`` for the mean and ``-1`` per log-scale coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numeric import RandomStream, standard_normals
from .targets import LOG_2PI


@dataclass(frozen=True)
class VariationalParams:
    mean: np.ndarray
    log_scale: np.ndarray
    isotropic: bool = False

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        lam = np.asarray(self.log_scale, dtype=float)
        if mean.shape != lam.shape or mean.ndim != 1:
            raise ValueError("mean and log_scale must be vectors of equal length")
        if self.isotropic and (np.any(mean != 0) or np.any(lam != lam[0])):
            raise ValueError("isotropic params need zero mean and a shared log-scale")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "log_scale", lam)

    @classmethod
    def isotropic_init(cls, d, variance):
        return cls(np.zeros(d), np.full(d, 0.5 * np.log(variance)), isotropic=True)

    @classmethod
    def diagonal_init(cls, d, variance, mean=0.0):
        return cls(np.full(d, float(mean)), np.full(d, 0.5 * np.log(variance)))

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def scale(self):
        return np.exp(self.log_scale)

    @property
    def variance(self):
        return np.exp(2.0 * self.log_scale)

    def flat(self) -> np.ndarray:
        if self.isotropic:
            return self.log_scale[:1].copy()
        return np.concatenate([self.mean, self.log_scale])

    def with_flat(self, theta) -> "VariationalParams":
        theta = np.asarray(theta, dtype=float)
        d = self.dim
        if self.isotropic:
            return VariationalParams(np.zeros(d), np.full(d, theta[0]), True)
        return VariationalParams(theta[:d], theta[d:], False)


@dataclass(frozen=True)
class DrawRecord:
    eps: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class KernelSet:
    A: np.ndarray
    P: np.ndarray
    S: np.ndarray
    B: np.ndarray


def sample(q: VariationalParams, stream: RandomStream, n=None) -> DrawRecord:
    """Reparameterized draws; shape ``(d,)`` if ``n`` is None else ``(n, d)``."""
    shape = q.dim if n is None else (n, q.dim)
    eps = standard_normals(stream, shape)
    return draw_from_eps(q, eps)


def draw_from_eps(q: VariationalParams, eps) -> DrawRecord:
    eps = np.asarray(eps, dtype=float)
    return DrawRecord(eps, q.mean + q.scale * eps)


def log_density_from_eps(q: VariationalParams, eps):
    """``log q(mu + sigma * eps)`` without re-deriving ``eps`` from ``z``."""
    eps = np.asarray(eps, dtype=float)
    return -q.dim * 0.5 * LOG_2PI - np.sum(q.log_scale) - 0.5 * np.sum(eps * eps, axis=-1)


def log_density(q: VariationalParams, z):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != q.dim:
        raise ValueError(f"expected last dimension {q.dim}, got shape {z.shape}")
    u = (z - q.mean) / q.scale
    return np.sum(-0.5 * LOG_2PI - q.log_scale - 0.5 * u * u, axis=-1)


def gradient_kernels(q: VariationalParams, draw: DrawRecord, target, grad_p=None) -> KernelSet:
    """Per-draw kernels for a batch of draws; see the module docstring.

    ``grad_p`` may pass a precomputed ``target.grad_log_joint(draw.z)``.
    """
    z = np.atleast_2d(draw.z)
    if z.shape[1] != q.dim:
        raise ValueError("draw dimension does not match params")
    gp = np.atleast_2d(target.grad_log_joint(z) if grad_p is None else grad_p)
    eps = np.atleast_2d(draw.eps)
    dz = q.scale * eps                # z - mu
    sq = eps * eps                    # (z - mu)^2 / sigma^2
    a_lam = gp * dz
    if q.isotropic:
        A = a_lam.sum(axis=1, keepdims=True)
        P = -sq.sum(axis=1, keepdims=True)
        S = (sq - 1.0).sum(axis=1, keepdims=True)
    else:
        u = eps / q.scale             # (z - mu) / sigma^2
        A = np.hstack([gp, a_lam])
        P = np.hstack([-u, -sq])
        S = np.hstack([u, sq - 1.0])
    return KernelSet(A, P, S, P + S)
