import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from rigidlab.errors import BadParams
from rigidlab.lattice import (
    INSERTION_TOLERANT,
    RIGID_LEVEL1,
    PerturbedLatticeModel,
    classify_lattice,
    hellinger_affinity,
    kakutani_product,
    lipschitz_bound,
    log_gaussian_affinity,
    loglog_slope,
    sample,
    variance_linear_statistic,
    variance_terms,
)
from rigidlab.testfunctions import build_test_function

LS = (8, 16, 32, 64, 128)


def quad_affinity(m1, s1, m2, s2):
    f = lambda x: np.sqrt(stats.norm.pdf(x, m1, s1) * stats.norm.pdf(x, m2, s2))
    lo = min(m1 - 12 * s1, m2 - 12 * s2)
    hi = max(m1 + 12 * s1, m2 + 12 * s2)
    val, _ = integrate.quad(f, lo, hi, points=[m1, m2], epsabs=0, epsrel=1e-13, limit=200)
    return val


def test_unit_shift_affinity():
    assert np.exp(log_gaussian_affinity(0.0, 1.0, 1.0, 1.0)) == pytest.approx(np.exp(-1 / 8), rel=1e-14)
    assert quad_affinity(0, 1, 1, 1) == pytest.approx(0.882497, abs=1e-6)


def test_identical_laws_have_affinity_one():
    assert np.exp(log_gaussian_affinity(2.0, 3.0, 2.0, 3.0)) == 1.0


@pytest.mark.parametrize("k", [1, 2, 5, 30])
@pytest.mark.parametrize("beta", [0.0, 0.3, 0.5, 1.0])
def test_affinity_matches_quadrature(k, beta):
    want = quad_affinity(k, k**beta, k + 1, (k + 1) ** beta)
    assert hellinger_affinity(k, beta) == pytest.approx(want, abs=1e-10)


def test_affinity_defect_decays_like_inverse_square_for_beta_one():
    ks = np.array([1e2, 1e3, 1e4])
    defect = -np.expm1(np.log(hellinger_affinity(ks, 1.0)))
    assert loglog_slope(ks, defect) == pytest.approx(-2.0, abs=0.05)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10**7), st.floats(0.0, 3.0))
def test_affinity_in_unit_interval(k, beta):
    a = hellinger_affinity(k, beta)
    assert 0.0 < a <= 1.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 2.0), st.integers(1, 5000))
def test_partial_products_nonincreasing(beta, K):
    p = kakutani_product(beta, K)
    assert p[0] == 1.0
    assert np.all(np.diff(p) <= 0)


def test_kakutani_converges_above_half():
    p = kakutani_product(1.0, 10**4)
    assert p[10**3] - p[10**4] < 1e-3
    assert p[-1] > 0.5


def test_kakutani_collapses_below_half():
    p = kakutani_product(0.4, 10**6)
    assert p[-1] < 0.01
    assert np.argmax(p < 0.01) > 1000


def test_sample_beta_zero_pooled_unit_variance():
    model = PerturbedLatticeModel(0.0, 500)
    rng = np.random.default_rng(3)
    dev = np.concatenate([sample(model, rng).points - model.indices for _ in range(20)])
    se = np.sqrt(2.0 / (dev.size - 1))
    assert abs(dev.var(ddof=1) - 1.0) < 3 * se


def test_sample_sd_grows_like_k_beta():
    model = PerturbedLatticeModel(1.0, 100, symmetric=False)
    rng = np.random.default_rng(4)
    draws = np.array([sample(model, rng).points[99] for _ in range(10_000)]) - 100
    sd = draws.std(ddof=1)
    assert abs(sd - 100.0) < 3 * sd / np.sqrt(2 * (draws.size - 1))


def test_sample_reproducible():
    model = PerturbedLatticeModel(0.5, 50)
    a = sample(model, np.random.default_rng(11)).points
    b = sample(model, np.random.default_rng(11)).points
    assert np.array_equal(a, b)


def test_zero_function_has_zero_variance():
    model = PerturbedLatticeModel(0.25, 1)
    assert variance_linear_statistic(model, lambda x: 0.0 * x, 16) == 0.0


def test_per_index_variance_matches_adaptive_quadrature():
    h = build_test_function("LatticeBump", eps=0.5)
    model = PerturbedLatticeModel(0.25, 1)
    L = 4.0
    ks, var = variance_terms(model, h, L)
    for k in (-9, -3, 0, 2, 5, 40):
        s = float(model.sd_at(k))
        pdf = lambda x: stats.norm.pdf(x, k, s)
        kinks = [-L, -L * h.r0, L * h.r0, L]
        m1 = integrate.quad(lambda x: h(x / L) * pdf(x), -L, L, points=kinks, epsabs=1e-15, limit=200)[0]
        m2 = integrate.quad(lambda x: h(x / L) ** 2 * pdf(x), -L, L, points=kinks, epsabs=1e-15, limit=200)[0]
        assert var[ks == k][0] == pytest.approx(m2 - m1 * m1, abs=1e-11)


def test_variance_slope_rigid_side():
    h = build_test_function("LatticeBump", eps=0.5)
    model = PerturbedLatticeModel(0.25, 1)
    v = [variance_linear_statistic(model, h, L) for L in LS]
    assert loglog_slope(LS, v) == pytest.approx(-0.5, abs=0.15)


def test_variance_slope_tolerant_side():
    h = build_test_function("LatticeBump", eps=0.5)
    model = PerturbedLatticeModel(0.75, 1)
    v = [variance_linear_statistic(model, h, L) for L in LS]
    assert loglog_slope(LS, v) == pytest.approx(0.5, abs=0.15)


@pytest.mark.parametrize("beta", [0.0, 0.25, 0.5])
def test_near_window_part_obeys_lipschitz_bound(beta):
    h = build_test_function("LatticeBump", eps=0.5)
    model = PerturbedLatticeModel(beta, 1)
    L = 16
    ks, var = variance_terms(model, h, L)
    near = var[np.abs(ks) <= 10 * L].sum()
    assert near <= lipschitz_bound(model, h, L, 10 * L) * (1 + 1e-6)


def test_variance_agrees_with_monte_carlo():
    h = build_test_function("LatticeBump", eps=0.5)
    model = PerturbedLatticeModel(0.25, 400)
    L = 16
    rng = np.random.default_rng(20)
    stats_ = np.array([np.sum(h(sample(model, rng).points / L)) for _ in range(5000)])
    exact = variance_linear_statistic(model, h, L)
    se = stats_.var(ddof=1) * np.sqrt(2.0 / (stats_.size - 1))
    assert abs(stats_.var(ddof=1) - exact) < 3 * se


def test_not_locally_finite_at_beta_one():
    h = build_test_function("LatticeBump", eps=0.5)
    with pytest.raises(BadParams):
        variance_linear_statistic(PerturbedLatticeModel(1.0, 1), h, 8)


def test_classification():
    tol = classify_lattice(1.0)
    assert tol.verdict == INSERTION_TOLERANT and tol.kakutani_limit > 0.1
    assert classify_lattice(0.5).verdict == RIGID_LEVEL1
    rigid = classify_lattice(0.0)
    assert rigid.verdict == RIGID_LEVEL1 and rigid.variance_slope < 0
