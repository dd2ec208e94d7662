import json
from fractions import Fraction

import numpy as np
import pytest

from rigidlab.appendix import appendix_report_dict, six_point_example, two_dependent_example, verify_appendix_examples
from rigidlab.dpp import RadialDppModel
from rigidlab.errors import BadParams, NotAchieved, WindowTooSmall
from rigidlab.measures import bergman, ginibre
from rigidlab.rigidity import (
    DppProcess,
    GafProcess,
    LatticeProcess,
    certificate_scan,
    recover_inside_moments,
    unit_test_function,
)


@pytest.fixture(scope="module")
def gin64():
    return DppProcess(RadialDppModel(ginibre(), 64))


def test_unit_function_plateau_is_the_disk():
    for kind in ("MollifiedLog", "PiecewiseLog"):
        tf = unit_test_function(kind, 0, 1.5, 1.0)
        assert tf.inner_radius == pytest.approx(1.5)
    tf = unit_test_function("MollifiedLog", 2, 1.5, 1.0)
    assert tf.k == 2 and tf.kind == "MomentWeighted"
    z = 1.2 * np.exp(0.3j)
    assert tf.scaled(3.0).value(z) == pytest.approx(z**2)


def test_certificate_infinite_delta_is_first_point(gin64):
    c = certificate_scan(gin64, "PiecewiseLog", 0, 2.0, np.inf, eps_grid=[1.0, 0.5], L_grid=[1.0, 2.0])
    assert (c.epsilon, c.L) == (1.0, 1.0)


def test_certificate_ginibre_and_bergman():
    c = certificate_scan(DppProcess(RadialDppModel(ginibre(), 256)), "PiecewiseLog", 0, 2.0, 1e-3)
    assert c.achieved_variance <= 1e-3
    with pytest.raises(NotAchieved) as info:
        certificate_scan(DppProcess(RadialDppModel(bergman(), 256)), "PiecewiseLog", 0, 0.25, 1e-3)
    best = info.value.best
    assert best[2] > 0.05
    assert all(v > 0.05 for _, _, v in info.value.context["evaluated"])


def test_lattice_certificate_runs():
    c = certificate_scan(LatticeProcess(0.25), "LatticeBump", 0, 1.0, 0.3, eps_grid=[0.5], L_grid=[8, 16, 32, 64])
    assert c.achieved_variance <= 0.3 and c.L == 32


def test_recovery_unbiased_and_variance_matches(gin64):
    rep = recover_inside_moments(gin64, 2.0, 0, 1.0, 2.0, 2000, master_seed=4, predict=True)
    res = rep.estimate[:, 0] - rep.truth[:, 0]
    assert abs(res.mean()) < 3 * rep.residual_se[0]
    assert rep.residual_variance[0] <= rep.predicted_variance[0] + 3 * rep.residual_variance_se[0]
    assert abs(rep.residual_variance[0] - rep.predicted_variance[0]) < 3 * rep.residual_variance_se[0]
    assert 0 <= rep.success_rate <= 1


def test_recovery_empty_inside_rounds_to_zero():
    proc = DppProcess(RadialDppModel(ginibre(), 256))
    rep = recover_inside_moments(proc, 0.05, 0, 0.1, 30.0, 20, master_seed=1)
    assert np.all(rep.truth[:, 0] == 0)
    assert np.all(np.rint(rep.estimate[:, 0].real) == 0)


def test_recovery_window_and_params(gin64):
    with pytest.raises(WindowTooSmall):
        recover_inside_moments(gin64, 2.0, 0, 1.0, 2.0, 10, 0, max_window=3.0)
    with pytest.raises(BadParams):
        recover_inside_moments(gin64, 2.0, 0, 1.0, 0.5, 10, 0)


def test_gaf_moment_recovery_matches_exact_variance():
    rep = recover_inside_moments(GafProcess(0.5), 0.3, 1, 16.0, 2.0, 200, master_seed=9, predict=True)
    for k in (0, 1):
        assert abs(rep.residual_variance[k] - rep.predicted_variance[k]) < 3 * rep.residual_variance_se[k]
    assert abs(rep.residual_mean[1]) < 4 * rep.residual_se[1]


def test_report_exports(gin64):
    rep = recover_inside_moments(gin64, 2.0, 0, 1.0, 2.0, 5, master_seed=0)
    d = json.loads(rep.to_json(config_hash="x"))
    assert d["replicas"] == 5 and len(d["per_replica"]) == 5 and d["config_hash"] == "x"
    lines = rep.to_csv().split("\r\n")
    assert lines[0].startswith("k,success_rate,residual_variance")


def test_six_point_example():
    r = six_point_example()
    assert r["common_sigma_algebra_trivial"] and r["support_sizes"] == [2, 2, 2]
    assert all(set(v.values()) == {Fraction(1, 2)} for v in r["conditional_laws"].values())


def test_two_dependent_example():
    r = two_dependent_example()
    assert r["forcing_case_all_one"]
    assert r["pair_conditional"]["00"]["P_X0_is_1"] == Fraction(1, 5)
    assert r["pair_conditional"]["11"]["probability"] == Fraction(13, 32)
    assert r["pair_nonforcing_strictly_inside"] and r["pair_values_all_positive"]
    assert r["B_holds"] and r["C_fails"]
    # conditioning on the whole window pins X_0 in some non-forcing patterns too
    assert r["full_nonforcing_degenerate_patterns"] > 0


def test_appendix_summary():
    assert verify_appendix_examples()["all_checks_pass"]
    json.dumps(appendix_report_dict())
