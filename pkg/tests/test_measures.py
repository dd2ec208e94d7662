import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import gammaln

from rigidlab.errors import InsufficientLadder, TableNotBuilt
from rigidlab.measures import (
    INCONCLUSIVE,
    NOT_RIGID_NUMBERS,
    RIGID_LEVEL1,
    GammaVariate,
    GaussianPower,
    RadialMeasure,
    Tabulated,
    bergman,
    classify_rigidity,
    compute_moments,
    gamma_cdf,
    ginibre,
    sample_gamma,
)


def gp_log_moment(a, b, c, j):
    # E|z|^{2j} for density ~ |z|^a exp(-b |z|^c): ratio of gamma functions
    s0 = (a + 2.0) / c
    return gammaln(s0 + 2.0 * j / c) - gammaln(s0) - (2.0 * j / c) * np.log(b)


def uniform_tabulated(x_max=2.0, n=9):
    x = tuple(np.linspace(0.0, x_max, n))
    return RadialMeasure(Tabulated(x, tuple(np.ones(n))))


def test_ginibre_mu():
    lad = compute_moments(ginibre(), 6)
    assert np.allclose(lad.mu[:7], np.arange(1, 8), rtol=1e-12, atol=0)
    assert lad.log_c[0] == 0.0


def test_bergman_c_and_mu():
    lad = compute_moments(bergman(), 6)
    j = np.arange(7)
    assert np.allclose(np.exp(lad.log_c[:7]), j + 1, rtol=1e-12)
    assert np.allclose(lad.mu[:7], (j + 1) / (j + 2), rtol=1e-12)
    assert lad.mu[0] == pytest.approx(0.5, rel=1e-14)


def test_bergman_sigma_closed_form():
    lad = compute_moments(bergman(), 40)
    j = np.arange(41)
    assert np.allclose(lad.sigma[:41], 1.0 / ((j + 1) * (j + 3)), rtol=1e-9)


def test_ginibre_nu_is_gamma_kurtosis():
    lad = compute_moments(ginibre(), 30)
    s = np.arange(1, 32)
    assert np.allclose(lad.nu, (3 + 6 / s) / s**2, rtol=1e-8)


@pytest.mark.parametrize("abc", [(0.0, 1.0, 2.0), (1.5, 2.0, 3.0), (0.0, 0.5, 1.0), (3.0, 1.0, 4.0)])
def test_log_c_matches_gamma_function_oracle(abc):
    a, b, c = abc
    lad = compute_moments(RadialMeasure(GaussianPower(a, b, c)), 20)
    want = -np.array([gp_log_moment(a, b, c, j) for j in range(lad.log_c.size)])
    # relative error 1e-10 on c_j is absolute 1e-10 on log c_j
    assert np.max(np.abs(lad.log_c - want)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 4.0), st.floats(0.2, 3.0), st.floats(0.5, 4.0))
def test_ladder_sign_invariants(a, b, c):
    lad = compute_moments(RadialMeasure(GaussianPower(a, b, c)), 12)
    assert np.all(lad.mu > 0)
    assert np.all(lad.sigma >= 0)
    assert np.all(lad.nu >= 0)
    assert lad.log_c[0] == 0.0


def test_classifier_bergman():
    res = classify_rigidity(compute_moments(bergman(), 64), abs_continuous=True)
    assert res.verdict == NOT_RIGID_NUMBERS
    assert res.diagnostics["sigma_tail_exponent"] == pytest.approx(-2.0, abs=0.2)


def test_classifier_ginibre():
    res = classify_rigidity(compute_moments(ginibre(), 64), abs_continuous=True)
    assert res.verdict == RIGID_LEVEL1
    assert res.diagnostics["smallest_a"] == 2
    assert res.diagnostics["sigma_tail_exponent"] == pytest.approx(-1.0, abs=0.1)
    assert res.diagnostics["nu_tail_exponent"] == pytest.approx(-2.0, abs=0.2)


def test_classifier_short_ladder():
    lad = compute_moments(ginibre(), 2)
    assert classify_rigidity(lad, True).verdict == INCONCLUSIVE
    with pytest.raises(InsufficientLadder):
        classify_rigidity(lad, True, strict=True)


def test_cdf_examples():
    assert gamma_cdf(GammaVariate(0, ginibre()), 1.0) == pytest.approx(1 - np.exp(-1), abs=1e-12)
    assert gamma_cdf(GammaVariate(1, bergman()), 0.5) == pytest.approx(0.25, abs=1e-15)
    for m in (ginibre(), bergman(), uniform_tabulated()):
        for j in (0, 3):
            assert gamma_cdf(GammaVariate(j, m), 0.0) == 0.0
            assert gamma_cdf(GammaVariate(j, m), -1.0) == 0.0


def test_tabulated_cdf_closed_form():
    m = uniform_tabulated(2.0)
    for j in (0, 2, 5):
        x = np.array([0.3, 1.0, 1.7])
        assert np.allclose(gamma_cdf(GammaVariate(j, m), x), (x / 2.0) ** (j + 1), atol=1e-10)


@pytest.mark.parametrize("measure", [ginibre(), bergman(), uniform_tabulated()], ids=["ginibre", "bergman", "tab"])
def test_stochastic_domination_and_monotone_cdf(measure):
    hi = 30.0 if measure.family.__class__ is GaussianPower else measure.support[1]
    x = np.linspace(0, hi, 301)
    prev = None
    for j in range(8):
        F = gamma_cdf(GammaVariate(j, measure), x)
        assert np.all(np.diff(F) >= -1e-15)
        if prev is not None:
            assert np.all(F <= prev + 1e-12)
        prev = F


def test_sampler_mean_and_second_moment():
    rng = np.random.default_rng(7)
    for j in (0, 3, 10):
        d = sample_gamma(GammaVariate(j, ginibre()), rng, size=100_000)
        se = d.std(ddof=1) / np.sqrt(d.size)
        assert abs(d.mean() - (j + 1)) < 3 * se
        sq = d * d
        assert abs(sq.mean() - (j + 1) * (j + 2)) < 3 * sq.std(ddof=1) / np.sqrt(d.size)


def test_bergman_draws_in_unit_interval():
    d = sample_gamma(GammaVariate(0, bergman()), np.random.default_rng(1), size=10_000)
    assert d.min() >= 0 and d.max() <= 1


def test_tabulated_sampling_needs_table():
    m = uniform_tabulated()
    with pytest.raises(TableNotBuilt):
        sample_gamma(GammaVariate(0, m), np.random.default_rng(0))
    d = sample_gamma(GammaVariate(2, m.with_inverse_tables(4)), np.random.default_rng(0), size=50_000)
    # Gamma_2 has density 3 x^2 / 8 on [0, 2], mean 1.5
    assert abs(d.mean() - 1.5) < 3 * d.std(ddof=1) / np.sqrt(d.size)


@pytest.mark.parametrize(
    "measure",
    [ginibre(), bergman(), uniform_tabulated().with_inverse_tables(10), RadialMeasure(GaussianPower(1.0, 2.0, 3.0))],
    ids=["ginibre", "bergman", "tab", "gp"],
)
def test_nu_matches_monte_carlo(measure):
    J = 8
    lad = compute_moments(measure, J)
    rng = np.random.default_rng(123)
    for j in range(J - 2):
        x = sample_gamma(GammaVariate(j, measure), rng, size=100_000) / lad.mu[j]
        y = (x - 1.0) ** 4
        assert abs(y.mean() - lad.nu[j]) < 4 * y.std(ddof=1) / np.sqrt(y.size)


def test_moment_identity_by_direct_quadrature():
    xs = np.linspace(0.0, 3.0, 13)
    ws = 1.0 + 0.5 * np.sin(xs)
    m = RadialMeasure(Tabulated(tuple(xs), tuple(ws)))
    lad = compute_moments(m, 10)
    wfun = lambda x: np.interp(x, xs, ws)
    for j in (0, 2, 5):
        base = integrate.quad(lambda x: x**j * wfun(x), 0, 3, points=xs[1:-1], epsrel=1e-14, limit=200)[0]
        for k in range(1, 5):
            num = integrate.quad(lambda x: x ** (j + k) * wfun(x), 0, 3, points=xs[1:-1], epsrel=1e-14, limit=200)[0]
            assert np.prod(lad.mu[j:j + k]) == pytest.approx(num / base, rel=1e-8)


def test_ladder_csv():
    text = compute_moments(bergman(), 3).to_csv()
    lines = text.split("\r\n")
    assert lines[0] == "j,log_c,mu,sigma,nu"
    assert len(lines) == 6 and lines[-1] == ""
    assert float(lines[1].split(",")[2]) == pytest.approx(0.5)
