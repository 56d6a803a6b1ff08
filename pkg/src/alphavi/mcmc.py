"""Hamiltonian Monte Carlo with a unit metric and split R-hat.

Chains run in lockstep as rows of a ``(chains, d)`` array; each chain draws
its momenta and accept/reject uniforms from its own substream.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .numeric import RandomStream

log = logging.getLogger(__name__)

DIVERGENCE_THRESHOLD = 1e3


@dataclass(frozen=True)
class HmcConfig:
    leapfrog_steps: int = 32
    initial_step_size: float = 0.05
    warmup: int = 1000
    samples: int = 2000
    chains: int = 4
    target_accept: float = 0.7
    jitter: float = 0.2          # step size scaled by U(1 - jitter, 1 + jitter) per transition

    def __post_init__(self):
        if self.chains < 2:
            raise ValueError("split R-hat needs at least two chains")
        if min(self.leapfrog_steps, self.warmup, self.samples) < 1:
            raise ValueError("step and iteration counts must be >= 1")
        if not 0 < self.target_accept < 1:
            raise ValueError("target_accept must be in (0, 1)")
        if not 0 <= self.jitter < 1:
            raise ValueError("jitter must be in [0, 1)")


@dataclass
class PosteriorSummary:
    samples: np.ndarray          # (chains * samples, d), chain-major
    chains: np.ndarray           # (chains, samples, d)
    mean: np.ndarray
    variance: np.ndarray
    rhat: np.ndarray
    acceptance_rate: float
    step_size: np.ndarray        # per chain, frozen after warmup
    divergences: int

    @property
    def max_rhat(self) -> float:
        return float(np.max(self.rhat))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            d = self.samples.shape[1]
            w.writerow(["chain", "draw"] + [f"z{i}" for i in range(d)])
            for c, chain in enumerate(self.chains):
                for t, z in enumerate(chain):
                    w.writerow([c, t] + [repr(float(x)) for x in z])


def leapfrog(grad, z, p, step_size, n_steps):
    """Integrate ``n_steps`` leapfrog steps; ``step_size`` may be per-row."""
    eps = np.asarray(step_size, dtype=float)
    if eps.ndim == 1:
        eps = eps[:, None]
    g = grad(z)
    p = p + 0.5 * eps * g
    for i in range(n_steps):
        z = z + eps * p
        g = grad(z)
        if i < n_steps - 1:
            p = p + eps * g
    p = p + 0.5 * eps * g
    return z, p


def _hamiltonian(logp, z, p):
    return -logp(z) + 0.5 * np.sum(p * p, axis=-1)


def hmc_sample(target, config: HmcConfig, stream: RandomStream) -> PosteriorSummary:
    """Sample ``target`` with HMC; step sizes adapt during warmup then freeze.

    Each transition jitters the step size to break periodic trajectories.
    Adaptation is Robbins-Monro on ``log step``:
    ``log e += t**-0.6 * (accept - target_accept)``. The frozen value is the
    average of ``log e`` over the second half of warmup.
    """
    C, d = config.chains, target.dim
    rngs = [stream.spawn(stream.stream_id * 1000003 + c + 1).generator for c in range(C)]
    z = np.stack([r.standard_normal(d) for r in rngs])
    log_eps = np.full(C, math.log(config.initial_step_size))
    avg_log_eps, n_avg = np.zeros(C), 0
    draws = np.empty((C, config.samples, d))
    accepted = 0.0
    divergences = 0
    logp, grad = target.log_joint, target.grad_log_joint

    total = config.warmup + config.samples
    for it in range(total):
        warm = it < config.warmup
        if it == config.warmup:
            log_eps = avg_log_eps / max(n_avg, 1)
        p0 = np.stack([r.standard_normal(d) for r in rngs])
        scale = 1.0 + config.jitter * np.array([r.uniform(-1.0, 1.0) for r in rngs])
        h0 = _hamiltonian(logp, z, p0)
        with np.errstate(over="ignore", invalid="ignore"):
            z1, p1 = leapfrog(grad, z, p0, scale * np.exp(log_eps), config.leapfrog_steps)
            h1 = _hamiltonian(logp, z1, p1)
        dh = h1 - h0
        bad = ~np.isfinite(dh) | (dh > DIVERGENCE_THRESHOLD)
        if not warm:
            divergences += int(bad.sum())
        if np.any(~np.isfinite(z1[~bad])):
            raise FloatingPointError("non-finite state in HMC trajectory")
        dh = np.where(bad, np.inf, dh)
        accept_prob = np.exp(-np.clip(dh, 0.0, None))
        u = np.array([r.uniform() for r in rngs])
        take = u < accept_prob
        z = np.where(take[:, None], z1, z)
        if warm:
            log_eps = log_eps + (it + 1) ** -0.6 * (accept_prob - config.target_accept)
            if it >= config.warmup // 2:
                avg_log_eps += log_eps
                n_avg += 1
        else:
            draws[:, it - config.warmup] = z
            accepted += float(accept_prob.mean())

    if divergences:
        log.warning("%d divergent HMC transitions after warmup", divergences)
    pooled = draws.reshape(C * config.samples, d)
    rhat = np.array([split_rhat(draws, i) for i in range(d)])
    return PosteriorSummary(
        samples=pooled, chains=draws, mean=pooled.mean(axis=0), variance=pooled.var(axis=0),
        rhat=rhat, acceptance_rate=accepted / config.samples,
        step_size=np.exp(log_eps), divergences=divergences)


def split_rhat(chains, coordinate: int = 0) -> float:
    """Split R-hat of one coordinate.

    ``chains`` is ``(n_chains, n_draws)`` or ``(n_chains, n_draws, d)``.
    Returns ``inf`` when the within-chain variance is zero.
    """
    x = np.asarray(chains, dtype=float)
    if x.ndim == 3:
        x = x[:, :, coordinate]
    m, n = x.shape
    if m < 2 or n < 4:
        raise ValueError("need >= 2 chains with >= 4 draws each")
    half = n // 2
    splits = np.concatenate([x[:, :half], x[:, n - half:]], axis=0)
    n = half
    within = splits.var(axis=1, ddof=1).mean()
    between = n * splits.mean(axis=1).var(ddof=1)
    if within <= 0:
        return math.inf
    var_plus = (n - 1) / n * within + between / n
    return float(math.sqrt(var_plus / within))
