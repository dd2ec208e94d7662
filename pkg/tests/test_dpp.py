import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from rigidlab.dpp import (
    DiskIndicator,
    RadialDppModel,
    covariance_exact,
    mixture_demo,
    mixture_identity_check,
    number_variance,
    palm_log_theta,
    palm_overlap,
    reproducing_residual,
    rho_tail,
    sample_full,
    sample_kernel,
    sample_moduli,
    telescoping_terms,
)
from rigidlab.errors import BadParams, NotContraction
from rigidlab.measures import RadialMeasure, bergman, ginibre, GaussianPower
from rigidlab.seeding import replica_rng
from rigidlab.testfunctions import build_test_function


@pytest.fixture(scope="module")
def gin8():
    return RadialDppModel(ginibre(), 8)


def test_moduli_rank_zero_is_exponential():
    m = RadialDppModel(ginibre(), 0)
    rng = np.random.default_rng(0)
    x = np.array([sample_moduli(m, rng)[0] ** 2 for _ in range(20_000)])
    assert abs(x.mean() - 1.0) < 3 * x.std(ddof=1) / np.sqrt(x.size)


def test_bergman_moduli_in_disk():
    m = RadialDppModel(bergman(), 20)
    r = sample_moduli(m, np.random.default_rng(1))
    assert r.size == 21 and r.max() <= 1.0 and np.all(np.diff(r) >= 0)


def test_number_variance_by_moduli(gin8):
    rng = np.random.default_rng(2)
    counts = np.array([np.count_nonzero(sample_moduli(gin8, rng) < 2.0) for _ in range(20_000)])
    want = number_variance(gin8, 2.0)
    dev = (counts - counts.mean()) ** 2
    assert abs(dev.mean() - want) < 4 * dev.std(ddof=1) / np.sqrt(counts.size)


def test_reproducing_property():
    rng = np.random.default_rng(3)
    for meas in (ginibre(), bergman(), RadialMeasure(GaussianPower(1.0, 2.0, 3.0))):
        m = RadialDppModel(meas, 12)
        for _ in range(10):
            x, y = rng.normal(size=2) * 0.6 + 1j * rng.normal(size=2) * 0.6
            assert reproducing_residual(m, x, y) < 1e-6


def test_full_sample_rank_zero_matches_gamma0():
    m = RadialDppModel(ginibre(), 0)
    x = np.array([abs(sample_full(m, replica_rng(4, i)).points[0]) ** 2 for i in range(10_000)])
    assert stats.kstest(x, "expon").statistic < 0.02


def test_full_sample_intensity_and_angles(gin8):
    pts = np.concatenate([sample_full(gin8, replica_rng(5, i)).points for i in range(1500)])
    assert pts.size == 1500 * 9
    edges = np.array([0.0, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 6.0])
    obs = np.histogram(np.abs(pts), bins=edges)[0]
    P = gin8.cdf(edges**2)
    exp = 1500 * np.diff(P, axis=1).sum(axis=0)
    assert stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 1e-3
    ang = np.histogram(np.angle(pts), bins=12, range=(-np.pi, np.pi))[0]
    assert stats.chisquare(ang).pvalue > 1e-3


def test_full_and_moduli_agree(gin8):
    a = np.concatenate([np.sort(np.abs(sample_full(gin8, replica_rng(6, i)).points)) for i in range(1000)])
    rng = np.random.default_rng(6)
    b = np.concatenate([sample_moduli(gin8, rng) for _ in range(1000)])
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_full_sampling_rank_256_is_stable():
    m = RadialDppModel(ginibre(), 256)
    cfg = sample_full(m, replica_rng(7, 0))
    assert len(cfg) == 257 and np.all(np.isfinite(cfg.points))
    with pytest.raises(BadParams):
        sample_full(RadialDppModel(ginibre(), 300), replica_rng(7, 1))


def test_palm_overlap_basics():
    m = RadialDppModel(ginibre(), 4)
    assert palm_overlap(m, 0, 100, np.random.default_rng(0)).mean_min == 1.0
    est = palm_overlap(m, 1, 50_000, np.random.default_rng(0))
    # theta_1 = Gamma_0 ~ Exp(1): E min(theta, 1) = 1 - 1/e
    assert abs(est.mean_min - (1 - np.exp(-1))) < 4 * est.standard_error
    with pytest.raises(BadParams):
        palm_overlap(m, 2, 99, np.random.default_rng(0))
    assert np.all(np.isfinite(palm_log_theta(RadialDppModel(bergman(), 64), 64, np.random.default_rng(1), 1000)))


def test_covariance_of_constant_and_indicator(gin8):
    one = build_test_function("PiecewiseLog", r0=50.0, eps=1.0)
    phi = build_test_function("MollifiedLog", r0=0.4, eps=2.0)
    assert covariance_exact(gin8, one, phi) == pytest.approx(0.0, abs=1e-12)
    ind = DiskIndicator(2.0)
    assert covariance_exact(gin8, ind, ind) == pytest.approx(number_variance(gin8, 2.0), abs=1e-8)
    with pytest.raises(BadParams):
        covariance_exact(gin8, build_test_function("MomentWeighted", r0=0.4, eps=2.0, k=1), phi)


def test_covariance_matches_monte_carlo(gin8):
    phi = build_test_function("MollifiedLog", r0=0.4, eps=2.0)
    rng = np.random.default_rng(8)
    x = np.array([phi.profile(sample_moduli(gin8, rng)).sum() for _ in range(20_000)])
    dev = (x - x.mean()) ** 2
    assert abs(dev.mean() - covariance_exact(gin8, phi, phi)) < 3 * dev.std(ddof=1) / np.sqrt(x.size)


def test_rho_tail_examples():
    m = RadialDppModel(ginibre(), 256)
    vals = [rho_tail(m, R) for R in (2.0, 4.0, 8.0)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-3
    assert rho_tail(m, 0.0) == 0.0
    assert rho_tail(RadialDppModel(bergman(), 30), 0.7, a=1.2) <= 31
    with pytest.raises(BadParams):
        rho_tail(m, 1.0, a=1.0)


@pytest.mark.parametrize("meas", [ginibre(), bergman()], ids=["ginibre", "bergman"])
def test_telescoping_bound(meas):
    m = RadialDppModel(meas, 40)
    for R in (0.3, 0.5, 1.0, 3.0):
        t = telescoping_terms(m, R)
        assert abs(t["difference"]) <= t["bound"]


def test_mixture_identity_examples():
    assert mixture_identity_check(np.eye(2), [1, 0])
    assert mixture_identity_check([[2.0]], [0.5])


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_mixture_identity_random_psd(dim, seed):
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    u = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    assert mixture_identity_check(G @ G.conj().T, u)


def test_kernel_sampler_rejects_non_contraction(gin8):
    with pytest.raises(NotContraction):
        sample_kernel(gin8, 1.5 * np.eye(9), np.random.default_rng(0))


def test_mixture_demo_rank_two():
    m = RadialDppModel(ginibre(), 1)
    rep = mixture_demo(m, [0, 1], master_seed=3, replicas=1000, base=np.diag([1.0, 0.5]))
    assert set(rep.count_values) == {1, 2}
    assert min(rep.count_frequencies.values()) > 0.05
    assert rep.max_z_score < 4
    with pytest.raises(NotContraction):
        mixture_demo(m, [0, 1], master_seed=3, replicas=10)
