import math

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from alphavi.numeric import RandomStream
from alphavi.oracles import (DIVERGENCES, DegenerateBaseline, DivergenceKind, divergence,
                             golden_scale, kl_inclusive_up_to_const, log1p_chi_squared,
                             moment_match, optimal_scale)
from alphavi.targets import GaussianTarget, gaussian_schedule
from alphavi.variational import VariationalParams


def test_identical_distributions_have_zero_divergence():
    s2 = np.full(4, 3.0)
    for tag in DIVERGENCES:
        assert divergence(tag, 3.0, s2) == pytest.approx(0.0, abs=1e-12)


def test_closed_form_examples():
    assert divergence("kl-exclusive", 1.0, [2.0]) == pytest.approx(0.5 * math.log(2) - 0.25, abs=1e-12)
    assert divergence("kl-exclusive", 1.0, [2.0]) == pytest.approx(0.096574, abs=1e-6)
    assert divergence("chi-squared", 2.0, [1.0]) == pytest.approx(2 / math.sqrt(3) - 1, abs=1e-12)
    assert divergence("chi-squared", 2.0, [1.0]) == pytest.approx(0.154701, abs=1e-6)


def test_chi_squared_matches_quadrature():
    p, q = norm(scale=1.0), norm(scale=math.sqrt(2.0))
    val, _ = integrate.quad(lambda z: math.exp(2 * p.logpdf(z) - q.logpdf(z)), -40, 40)
    assert divergence("chi-squared", 2.0, [1.0]) == pytest.approx(val - 1, abs=1e-9)


def test_renyi_matches_quadrature():
    a, v, s2 = 0.5, 3.0, 1.5
    q, p = norm(scale=math.sqrt(v)), norm(scale=math.sqrt(s2))
    val, _ = integrate.quad(lambda z: math.exp(a * q.logpdf(z) + (1 - a) * p.logpdf(z)), -60, 60)
    assert divergence(DivergenceKind("renyi-alpha", a), v, [s2]) == pytest.approx(math.log(val) / (a - 1), abs=1e-9)


def test_chi_squared_domain():
    assert divergence("chi-squared", 1.0, [2.0]) == math.inf
    assert log1p_chi_squared(0.9, [2.0]) == math.inf
    # overflowing product is reported as +inf rather than raising
    assert divergence("chi-squared", 100.0, gaussian_schedule(1000)) == math.inf
    assert math.isfinite(log1p_chi_squared(100.0, gaussian_schedule(1000)))


@pytest.mark.parametrize("tag", DIVERGENCES)
def test_closed_forms_match_monte_carlo(tag):
    s2 = gaussian_schedule(3)
    v = 12.0
    n = 10**6
    rng = RandomStream(21, DIVERGENCES.index(tag)).generator
    p, q = GaussianTarget(s2), VariationalParams.isotropic_init(3, v)
    from alphavi.variational import log_density
    if tag in ("kl-exclusive", "renyi-alpha"):
        z = rng.standard_normal((n, 3)) * math.sqrt(v)
    else:
        z = rng.standard_normal((n, 3)) * np.sqrt(s2)
    log_r = p.log_joint(z) - log_density(q, z)        # log p/q
    if tag == "kl-exclusive":
        x, est = -log_r, None
    elif tag == "kl-inclusive":
        x, est = log_r, None
    elif tag == "chi-squared":
        x = np.exp(log_r)
        est = x.mean() - 1
        se = x.std() / math.sqrt(n)
    else:
        a = 0.5
        x = np.exp((1 - a) * log_r)
        est = math.log(x.mean()) / (a - 1)
        se = x.std() / math.sqrt(n) / x.mean() / abs(a - 1)
    if est is None:
        est, se = x.mean(), x.std() / math.sqrt(n)
    assert abs(divergence(tag, v, s2) - est) < 3 * se


def test_additivity():
    s2 = gaussian_schedule(6)
    for tag in ("kl-exclusive", "kl-inclusive", "renyi-alpha"):
        parts = sum(divergence(tag, 4.0, [s]) for s in s2)
        assert divergence(tag, 4.0, s2) == pytest.approx(parts, rel=1e-12)
    parts = sum(log1p_chi_squared(6.0, [s]) for s in s2)
    assert log1p_chi_squared(6.0, s2) == pytest.approx(parts, rel=1e-12)


def test_optimal_scale_examples():
    for tag in DIVERGENCES:
        assert optimal_scale(tag, np.full(5, 2.5)) == pytest.approx(2.5, rel=1e-6)
    s2 = gaussian_schedule(10)
    assert optimal_scale("kl-inclusive", s2) == pytest.approx(5.59, rel=1e-12)
    assert optimal_scale("kl-exclusive", s2) == pytest.approx(10 / np.sum(1 / s2), rel=1e-12)
    assert optimal_scale("kl-exclusive", s2) == pytest.approx(3.69, abs=0.005)


@pytest.mark.parametrize("d", [10, 100, 1000])
def test_golden_matches_analytic_means(d):
    s2 = gaussian_schedule(d)
    assert golden_scale("kl-inclusive", s2) == pytest.approx(np.mean(s2), rel=1e-6)
    assert golden_scale("kl-exclusive", s2) == pytest.approx(d / np.sum(1 / s2), rel=1e-6)


@pytest.mark.parametrize("tag", DIVERGENCES)
def test_optimum_is_stationary(tag):
    s2 = gaussian_schedule(10)
    v = optimal_scale(tag, s2)
    f = lambda x: divergence(tag, x, s2)  # noqa: E731
    h = 1e-5 * v
    deriv = (f(v + h) - f(v - h)) / (2 * h)
    assert abs(deriv) < 1e-6 * (1 + abs(f(v)))
    assert f(1.1 * v) > f(v) and f(0.9 * v) > f(v)


def test_kl_inclusive_metric():
    rng = np.random.default_rng(0)
    M = 20000
    z = rng.standard_normal((M, 1))
    q = VariationalParams(np.zeros(1), np.zeros(1))
    val = kl_inclusive_up_to_const(z, q, GaussianTarget([1.0]))
    assert val == pytest.approx(0.0, abs=1e-12)   # log p == log q pointwise here

    target = GaussianTarget([1.3])
    base = kl_inclusive_up_to_const(z, VariationalParams(np.zeros(1), np.zeros(1)), target)
    narrow = kl_inclusive_up_to_const(z, VariationalParams(np.zeros(1), np.full(1, 0.5 * math.log(0.5))), target)
    assert narrow > base


def test_kl_inclusive_metric_mc():
    rng = np.random.default_rng(1)
    M = 40000
    z = rng.standard_normal((M, 1))
    q = VariationalParams(np.array([0.0]), np.array([0.2]))
    target = GaussianTarget([1.0])
    from alphavi.variational import log_density
    terms = target.log_joint(z) - log_density(q, z)
    exact = divergence("kl-inclusive", math.exp(0.4), [1.0])
    assert abs(kl_inclusive_up_to_const(z, q, target) - exact) < 3 * terms.std() / math.sqrt(M)


def test_moment_match():
    rng = np.random.default_rng(2)
    m, s = np.array([1.0, -2.0, 0.5]), np.array([0.5, 2.0, 1.0])
    M = 10**5
    z = m + s * rng.standard_normal((M, 3))
    mean, var = moment_match(z)
    assert np.all(np.abs(mean - m) < 4 * s / math.sqrt(M))
    assert np.all(np.abs(var - s**2) < 4 * s**2 * math.sqrt(2 / M))
    mean, var = moment_match(np.array([[1.0], [4.0]]))
    assert mean[0] == 2.5 and var[0] == pytest.approx(9 / 4)
    with pytest.raises(DegenerateBaseline):
        moment_match(np.ones((5, 2)))
