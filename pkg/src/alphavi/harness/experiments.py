"""Experiment runners: Gaussian sweeps, logistic regression, weight collapse.

Every (experiment, estimator, d, K, replicate) cell owns one random stream
keyed by a stable hash of the cell, so adding replicates or cells never
changes the draws of existing ones.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..estimators import EstimationFailure, EstimatorKind, estimate, weight_spectrum
from ..mcmc import HmcConfig, PosteriorSummary, hmc_sample
from ..numeric import RandomStream, stream_id_for
from ..optim import AdamState, adam_step
from ..oracles import DIVERGENCES, DivergenceKind, kl_inclusive_up_to_const, moment_match, optimal_scale
from ..targets import GaussianTarget, gaussian_schedule, load_logistic_target
from ..variational import VariationalParams
from .config import ExperimentConfig
from .csvio import emit_csv

log = logging.getLogger(__name__)


class BaselineRejected(RuntimeError):
    """The MCMC baseline failed its convergence check."""


@dataclass
class TraceRow:
    step: int
    value: float
    ess: float
    max_weight: float
    wall_ns: int


@dataclass
class RunResult:
    trace: list
    params: VariationalParams
    status: str = "ok"
    message: str = ""


def optimize(kind, q0: VariationalParams, target, K, steps, step_size, stream,
             record_every=1, monitor=None) -> RunResult:
    """Run Adam on an estimator's descent direction.

    ``monitor(q)`` gives the traced value (default: ``sigma_q^2`` of the first
    coordinate). Rows are kept every ``record_every`` steps and at the end.
    """
    monitor = monitor or (lambda q: float(q.variance[0]))
    theta = q0.flat()
    state = AdamState.zeros(theta.size, step_size)
    q = q0
    trace = []
    start = time.perf_counter_ns()
    for t in range(1, steps + 1):
        try:
            est = estimate(kind, q, target, K, stream)
            state, theta = adam_step(state, theta, est.descent)
        except (EstimationFailure, FloatingPointError) as exc:
            log.warning("%s K=%d failed at step %d: %s", kind, K, t, exc)
            return RunResult(trace, q, "failed", f"step {t}: {exc}")
        q = q0.with_flat(theta)
        if t % record_every == 0 or t == steps:
            trace.append(TraceRow(t, monitor(q), est.ess, est.max_weight,
                                  time.perf_counter_ns() - start))
    return RunResult(trace, q)


def _map(func, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, *zip(*jobs)))
    return [func(*job) for job in jobs]


def _kind(cfg: ExperimentConfig, tag) -> EstimatorKind:
    return EstimatorKind(tag, cfg.alpha)


@lru_cache(maxsize=None)
def gaussian_optima(d, alpha=0.5) -> dict:
    s2 = gaussian_schedule(d)
    return {div: optimal_scale(DivergenceKind(div, alpha), s2) for div in DIVERGENCES}


def _write(cfg, name, rows):
    if not rows:
        return None
    return emit_csv(rows, os.path.join(cfg.output_dir, name))


def _trace_dicts(cell, trace, value_name):
    return [{**cell, "step": r.step, value_name: r.value, "ess": r.ess,
             "max_weight": r.max_weight} for r in trace]


def _timing_dicts(cell, trace):
    return [{**cell, "step": r.step, "wall_ns": r.wall_ns} for r in trace]


# -- Gaussian ---------------------------------------------------------------

def gaussian_cell(cfg: ExperimentConfig, tag, d, K, replicate, variances=None):
    """One Gaussian optimization run. ``variances`` overrides the schedule."""
    kind = _kind(cfg, tag)
    s2 = gaussian_schedule(d) if variances is None else np.asarray(variances, dtype=float)
    target = GaussianTarget(s2)
    q0 = VariationalParams.isotropic_init(d, cfg.init_variance)
    stream = RandomStream(cfg.seed, stream_id_for("gaussian", kind, d, K, replicate))
    res = optimize(kind, q0, target, K, cfg.steps, cfg.step_size, stream, cfg.trace_every)
    cell = {"estimator": tag, "d": d, "K": K, "replicate": replicate}
    if variances is None:
        optima = gaussian_optima(d, cfg.alpha)
    else:
        optima = {div: optimal_scale(DivergenceKind(div, cfg.alpha), s2) for div in DIVERGENCES}
    final = {**cell, "status": res.status,
             "final_sigma_q2": float(res.params.variance[0]),
             **{f"opt_{div.replace('-', '_')}": v for div, v in optima.items()},
             "target_divergence": kind.divergence,
             "target_optimum": optima[kind.divergence],
             "message": res.message}
    return _trace_dicts(cell, res.trace, "sigma_q2"), final, _timing_dicts(cell, res.trace)


def run_gaussian(cfg: ExperimentConfig) -> dict:
    jobs = [(cfg, tag, d, K, r) for tag in cfg.estimators for d in cfg.dims
            for K in cfg.ks for r in range(cfg.replicates)]
    out = _map(gaussian_cell, jobs, cfg.workers)
    traces = [row for t, _, _ in out for row in t]
    finals = [f for _, f, _ in out]
    files = {"traces": _write(cfg, "gaussian_traces.csv", traces),
             "final": _write(cfg, "gaussian_final.csv", finals)}
    if cfg.record_timing:
        files["timings"] = _write(cfg, "gaussian_timings.csv", [r for _, _, t in out for r in t])
    return {"traces": traces, "final": finals, "files": files}


# -- logistic regression -----------------------------------------------------

def logreg_baseline(cfg: ExperimentConfig, target) -> PosteriorSummary:
    hmc = HmcConfig(leapfrog_steps=cfg.hmc_leapfrog_steps, warmup=cfg.hmc_warmup,
                    samples=cfg.hmc_samples, chains=cfg.hmc_chains,
                    target_accept=cfg.hmc_target_accept)
    name = os.path.basename(cfg.dataset_path)
    summary = hmc_sample(target, hmc, RandomStream(cfg.seed, stream_id_for("logreg-hmc", name)))
    if summary.max_rhat > cfg.max_rhat:
        raise BaselineRejected(f"max R-hat {summary.max_rhat:.4f} exceeds {cfg.max_rhat}")
    return summary


def posterior_subsample(cfg: ExperimentConfig, samples) -> np.ndarray:
    stream = RandomStream(cfg.seed, stream_id_for("logreg-subsample"))
    m = min(cfg.loss_subsample, samples.shape[0])
    idx = np.sort(stream.generator.choice(samples.shape[0], size=m, replace=False))
    return samples[idx]


def logreg_cell(cfg: ExperimentConfig, tag, K, replicate, target, base_mean, base_var, sub):
    kind = _kind(cfg, tag)
    q0 = VariationalParams.diagonal_init(target.dim, cfg.init_variance)
    stream = RandomStream(cfg.seed, stream_id_for("logreg", os.path.basename(cfg.dataset_path), kind, K, replicate))
    res = optimize(kind, q0, target, K, cfg.steps, cfg.step_size, stream, cfg.loss_every,
                   monitor=lambda q: kl_inclusive_up_to_const(sub, q, target))
    q = res.params
    base_q = VariationalParams(base_mean, 0.5 * np.log(base_var))
    cell = {"estimator": tag, "K": K, "replicate": replicate}
    ratio = q.variance / base_var
    final = {**cell, "status": res.status,
             "final_loss": kl_inclusive_up_to_const(sub, q, target),
             "baseline_loss": kl_inclusive_up_to_const(sub, base_q, target),
             "mean_rmse": float(np.sqrt(np.mean((q.mean - base_mean) ** 2))),
             "frac_var_below": float(np.mean(q.variance < base_var)),
             "median_var_ratio": float(np.median(ratio)),
             "message": res.message}
    params = []
    for block, learned, base in (("mean", q.mean, base_mean), ("variance", q.variance, base_var)):
        for rank, i in enumerate(np.argsort(base, kind="stable")):
            params.append({**cell, "block": block, "rank": rank, "coordinate": int(i),
                           "learned": float(learned[i]), "baseline": float(base[i])})
    return _trace_dicts(cell, res.trace, "loss"), final, params, _timing_dicts(cell, res.trace)


def run_logreg(cfg: ExperimentConfig, baseline: PosteriorSummary = None) -> dict:
    """Fit the MCMC baseline (unless given) and run every (estimator, K, replicate) cell."""
    target = load_logistic_target(cfg.dataset_path, cfg.prior_variance)
    if baseline is None:
        baseline = logreg_baseline(cfg, target)
    base_mean, base_var = moment_match(baseline.samples)
    sub = posterior_subsample(cfg, baseline.samples)
    jobs = [(cfg, tag, K, r, target, base_mean, base_var, sub)
            for tag in cfg.estimators for K in cfg.ks for r in range(cfg.replicates)]
    out = _map(logreg_cell, jobs, cfg.workers)
    base_rows = [{"coordinate": i, "mean": float(m), "variance": float(v), "rhat": float(h)}
                 for i, (m, v, h) in enumerate(zip(base_mean, base_var, baseline.rhat))]
    traces = [row for t, _, _, _ in out for row in t]
    finals = [f for _, f, _, _ in out]
    params = [row for _, _, p, _ in out for row in p]
    files = {"baseline": _write(cfg, "logreg_baseline.csv", base_rows),
             "traces": _write(cfg, "logreg_traces.csv", traces),
             "final": _write(cfg, "logreg_final.csv", finals),
             "params": _write(cfg, "logreg_params.csv", params)}
    if cfg.record_timing:
        files["timings"] = _write(cfg, "logreg_timings.csv", [r for *_, t in out for r in t])
    return {"baseline": baseline, "traces": traces, "final": finals, "params": params,
            "files": files, "dim": target.dim}


# -- weight collapse ----------------------------------------------------------

def collapse_cell(cfg: ExperimentConfig, d, K, replicate):
    target = GaussianTarget.from_schedule(d)
    q0 = VariationalParams.isotropic_init(d, cfg.init_variance)
    stream = RandomStream(cfg.seed, stream_id_for("collapse", d, K, replicate))
    return weight_spectrum(q0, target, K, stream, min(cfg.top, K))


def run_weight_collapse(cfg: ExperimentConfig) -> dict:
    cells = [(d, K) for d in cfg.dims for K in cfg.ks]
    jobs = [(cfg, d, K, r) for d, K in cells for r in range(cfg.replicates)]
    spectra = _map(collapse_cell, jobs, cfg.workers)
    rows, summary = [], []
    by_cell = {}
    for (_, d, K, r), spec in zip(jobs, spectra):
        by_cell.setdefault((d, K), []).append(spec)
        rows.extend({"d": d, "K": K, "replicate": r, "rank": i + 1, "weight": float(w)}
                    for i, w in enumerate(spec))
    for d, K in cells:
        specs = by_cell[(d, K)]
        summary.append({"d": d, "K": K,
                        "median_top1": float(np.median([s[0] for s in specs])),
                        "median_top2": float(np.median([s[:2].sum() for s in specs])),
                        "median_top10": float(np.median([s.sum() for s in specs]))})
    files = {"spectra": _write(cfg, "collapse_spectra.csv", rows),
             "summary": _write(cfg, "collapse_summary.csv", summary)}
    return {"spectra": rows, "summary": summary, "files": files}
