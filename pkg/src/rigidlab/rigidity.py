"""Variance certificates and recovery of inside statistics from outside points.

A process is wrapped in an adapter that knows three things about a scaled test
function h: the variance of sum h over the points, the deterministic mean E[sum h],
and how to draw a configuration large enough to contain the support of h.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dpp, gaf, lattice
from .errors import BadParams, NotAchieved, WindowTooSmall
from .seeding import replica_map
from .special import pairwise_mean_se
from .testfunctions import LATTICE, MOLLIFIED, MOMENT, PIECEWISE, build_test_function

C_VAR_GAF = 1.0 / (16.0 * np.pi**2)


# ---- process adapters -------------------------------------------------------------

class DppProcess:
    """Radial projection DPP of finite rank.

    Test functions must have compact support inside the domain of the measure, so a
    measure carried by a disk caps the admissible outer radius.
    """

    def __init__(self, model):
        self.model = model
        lo, hi = model.measure.support
        self.support_radius = float(np.sqrt(hi))
        self.tag = model.tag

    def admissible(self, h):
        return h.outer_radius < self.support_radius

    def variance(self, tf, L):
        if tf.k:
            raise BadParams("DPP variance is implemented for radial (k = 0) statistics", k=tf.k)
        h = tf.scaled(L)
        return dpp.covariance_exact(self.model, h, h)

    def expected(self, h):
        if h.k:
            return 0.0
        return float(np.sum(dpp._radial_expectations(self.model, [h])))

    def sample(self, rng, seed, window, radial_only):
        if radial_only:
            # only moduli enter rotation-invariant statistics; the moduli law is exact
            r = dpp.sample_moduli(self.model, rng)
            return r.astype(complex)
        return dpp.sample_full(self.model, rng, seed).points


class GafProcess:
    """Zeros of the alpha-GAF, sampled in a disk fitted to the test function."""

    def __init__(self, alpha, c_var=C_VAR_GAF, tail_tol=1e-12):
        self.alpha = float(alpha)
        self.c_var = c_var
        self.tail_tol = tail_tol
        self.support_radius = np.inf
        self.tag = f"gaf(alpha={self.alpha})"

    def admissible(self, h):
        return True

    def _model(self, R):
        return gaf.GafModel(self.alpha, R, self.tail_tol)

    def variance(self, tf, L):
        return self.c_var * gaf.variance_exact(self._model(tf.outer_radius * L), tf, L)

    def expected(self, h):
        if h.k:
            return 0.0
        return gaf.expected_linear_statistic(self._model(h.outer_radius), h)

    def sample(self, rng, seed, window, radial_only):
        return gaf.sample_zero_set(self._model(window), rng, seed).points


class LatticeProcess:
    """Gaussian-perturbed lattice on Z (certificate only)."""

    def __init__(self, beta, M=10):
        self.model = lattice.PerturbedLatticeModel(beta, M)
        self.support_radius = np.inf
        self.tag = f"lattice(beta={beta})"

    def admissible(self, h):
        return True

    def variance(self, tf, L):
        return lattice.variance_linear_statistic(self.model, tf, L)

    def expected(self, h):
        raise BadParams("recovery is not implemented for the lattice")

    def sample(self, rng, seed, window, radial_only):
        raise BadParams("recovery is not implemented for the lattice")


# ---- certificate ----------------------------------------------------------------------

def default_eps_grid():
    return tuple(2.0 ** (1.0 - 0.5 * i) for i in range(20))


def default_L_grid():
    return tuple(2.0 ** (0.5 * i) for i in range(15))


def unit_test_function(kind, k, r0, eps):
    """Unit-scale function equal to z^k (or 1) exactly on |z| < r0."""
    if kind == PIECEWISE:
        return build_test_function(PIECEWISE, r0=r0, eps=eps)
    if kind == LATTICE:
        return build_test_function(LATTICE, eps=eps)
    if kind == MOLLIFIED and k:
        kind = MOMENT
    return build_test_function(kind, r0=0.5 * r0, eps=eps, k=k)


@dataclass(frozen=True)
class Certificate:
    epsilon: float
    L: float
    achieved_variance: float
    evaluated: tuple = field(default=(), compare=False)  # (eps, L, variance) in scan order


def certificate_scan(process, kind, k, r0, delta, eps_grid=None, L_grid=None):
    """First (eps, L) on the grids, eps outer and L inner, with variance <= delta.

    Raises NotAchieved carrying the best (eps, L, variance) when the grids run out.
    """
    eps_grid = default_eps_grid() if eps_grid is None else tuple(eps_grid)
    L_grid = default_L_grid() if L_grid is None else tuple(L_grid)
    seen = []
    best = None
    for eps in eps_grid:
        tf = unit_test_function(kind, k, r0, eps)
        for L in L_grid:
            if not process.admissible(tf.scaled(L)):
                continue
            if not np.isfinite(delta) and delta > 0:
                return Certificate(eps, L, float("nan"), tuple(seen))
            v = float(process.variance(tf, L))
            seen.append((eps, L, v))
            if best is None or v < best[2]:
                best = (eps, L, v)
            if v <= delta:
                return Certificate(eps, L, v, tuple(seen))
    raise NotAchieved(
        f"no grid point reached variance <= {delta} for {process.tag}",
        best=best, evaluated=tuple(seen),
    )


# ---- recovery -----------------------------------------------------------------------

@dataclass
class RecoveryReport:
    process: str
    replicas: int
    r0: float
    epsilon: float
    L: float
    k_max: int
    truth: np.ndarray  # (replicas, k_max+1) complex
    estimate: np.ndarray
    expected_statistic: list
    success_rate: float  # k = 0 after rounding
    residual_mean: list
    residual_se: list
    residual_variance: list
    residual_variance_se: list
    predicted_variance: Optional[list] = None

    @property
    def inside_counts(self):
        return np.rint(self.truth[:, 0].real).astype(int)

    def manifold_dimension(self):
        """Real dimension 2 N_D - 2 k_max of the configurations sharing the recovered count and
        moments M_1..M_k_max, per replica (floored at 0)."""
        return np.maximum(2 * self.inside_counts - 2 * self.k_max, 0)

    def summary_rows(self):
        rows = []
        for k in range(self.k_max + 1):
            pv = None if self.predicted_variance is None else self.predicted_variance[k]
            rows.append({
                "k": k,
                "success_rate": self.success_rate if k == 0 else None,
                "residual_variance": self.residual_variance[k],
                "residual_variance_se": self.residual_variance_se[k],
                "predicted_variance": pv,
                "epsilon": self.epsilon,
                "L": self.L,
            })
        return rows

    def to_csv(self, header=None):
        buf = io.StringIO()
        if header:
            buf.write(header)
        w = csv.writer(buf, lineterminator="\r\n")
        cols = ["k", "success_rate", "residual_variance", "residual_variance_se", "predicted_variance", "epsilon", "L"]
        w.writerow(cols)
        for row in self.summary_rows():
            w.writerow(["" if row[c] is None else repr(row[c]) if isinstance(row[c], float) else row[c] for c in cols])
        return buf.getvalue()

    def to_dict(self):
        def cplx(a):
            return [[float(v.real), float(v.imag)] for v in a]

        return {
            "process": self.process,
            "replicas": self.replicas,
            "r0": self.r0,
            "epsilon": self.epsilon,
            "L": self.L,
            "k_max": self.k_max,
            "expected_statistic": [[float(np.real(e)), float(np.imag(e))] for e in self.expected_statistic],
            "success_rate": self.success_rate,
            "residual_mean": [[float(np.real(e)), float(np.imag(e))] for e in self.residual_mean],
            "residual_se": self.residual_se,
            "residual_variance": self.residual_variance,
            "residual_variance_se": self.residual_variance_se,
            "predicted_variance": self.predicted_variance,
            "manifold_real_dimension": [int(d) for d in self.manifold_dimension()],
            "per_replica": [
                {"truth": cplx(t), "estimate": cplx(e)} for t, e in zip(self.truth, self.estimate)
            ],
        }

    def to_json(self, **extra):
        d = self.to_dict()
        d.update(extra)
        return json.dumps(d, sort_keys=True, indent=1)


def recover_inside_moments(process, r0, k_max, epsilon, L, replicas, master_seed,
                           kind=MOLLIFIED, threads=None, predict=False, max_window=None):
    """Estimate M_k = sum_{|z|<r0} z^k from the points outside |z| < r0, k = 0..k_max.

    The k-th statistic is h_k = z^k phi(|z|/L) with phi = 1 on the disk, so
    sum_{inside} z^k = T_k - sum_{outside} h_k and E[T_k] stands in for T_k.
    """
    if r0 <= 0 or k_max < 0 or L < 1:
        raise BadParams("need r0 > 0, k_max >= 0 and L >= 1", r0=r0, k_max=k_max, L=L)
    tfs = [unit_test_function(kind if k == 0 else MOMENT, k, r0, epsilon) for k in range(k_max + 1)]
    hs = [tf.scaled(L) for tf in tfs]
    window = max(h.outer_radius for h in hs)
    if max_window is not None and window > max_window:
        raise WindowTooSmall("sampling window smaller than the test-function support",
                             window=max_window, needed=window)
    means = [process.expected(h) for h in hs]
    radial_only = k_max == 0

    def one(rng, seed, i):
        z = process.sample(rng, seed, window, radial_only)
        inside = np.abs(z) < r0
        truth = [np.sum(z[inside] ** k) if k else float(np.count_nonzero(inside)) for k in range(k_max + 1)]
        outside = [np.sum(h.value(z[~inside])) for h in hs]
        est = [means[k] - outside[k] for k in range(k_max + 1)]
        return np.array(truth, dtype=complex), np.array(est, dtype=complex)

    res = replica_map(one, master_seed, replicas, threads)
    truth = np.array([t for t, _ in res])
    est = np.array([e for _, e in res])
    resid = est - truth
    r_mean, r_se, r_var, r_var_se = [], [], [], []
    for k in range(k_max + 1):
        m, se = pairwise_mean_se(resid[:, k])
        dev = np.abs(resid[:, k] - m) ** 2
        v = float(dev.sum() / (replicas - 1)) if replicas > 1 else 0.0
        r_mean.append(complex(m))
        r_se.append(float(np.abs(se)) if k == 0 else float(np.sqrt(np.mean(dev) / replicas)))
        r_var.append(v)
        r_var_se.append(float(dev.std(ddof=1) / np.sqrt(replicas)) if replicas > 1 else 0.0)
    success = float(np.mean(np.rint(est[:, 0].real) == truth[:, 0].real))
    predicted = [float(process.variance(tf, L)) for tf in tfs] if predict else None
    return RecoveryReport(
        process=process.tag, replicas=int(replicas), r0=float(r0), epsilon=float(epsilon), L=float(L),
        k_max=int(k_max), truth=truth, estimate=est, expected_statistic=means, success_rate=success,
        residual_mean=r_mean, residual_se=r_se, residual_variance=r_var, residual_variance_se=r_var_se,
        predicted_variance=predicted,
    )


def residual_variance_exact(process, k, r0, epsilon, Ls):
    """Var(Shat_k - M_k) = Var(sum h_k) at each scale, from the process's variance evaluator."""
    tf = unit_test_function(MOMENT if k else MOLLIFIED, k, r0, epsilon)
    return [float(process.variance(tf, L)) for L in Ls]
