"""Radial determinantal processes of finite rank.

The model with measure mu and rank n has kernel K_n(z, w) = sum_{j<=n} c_j (z conj w)^j
against mu, i.e. it projects onto the span of e_j(z) = sqrt(c_j) z^j. Squared moduli
of its points are independent Gamma_0..Gamma_n, which makes most quantities here
exact sums over j of incomplete-moment expressions.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BadParams, ConditioningFailure, NotContraction
from .measures import (
    MomentLadder,
    RadialMeasure,
    compute_moments,
    gamma_cdf_matrix,
    gamma_sf_matrix,
    sample_gamma,
    sample_gamma_ladder,
    GammaVariate,
)
from .points import PointConfiguration
from .seeding import replica_map
from .special import gauss_legendre, pairwise_mean_se, piecewise_gauss_legendre

N_MAX = 256
# relative squared norm below which a new point is treated as lying in the span of earlier ones
COND_TOL = 1e-12


@dataclass(frozen=True)
class RadialDppModel:
    measure: RadialMeasure
    n: int
    ladder: Optional[MomentLadder] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise BadParams("rank index n must be a nonnegative integer", n=self.n)
        if self.ladder is None or self.ladder.J < self.n:
            object.__setattr__(self, "ladder", compute_moments(self.measure, max(int(self.n), 1)))

    @property
    def log_c(self):
        return self.ladder.log_c[: self.n + 1]

    @property
    def rank(self):
        return self.n + 1

    @property
    def tag(self):
        return f"dpp({self.measure.name},n={self.n})"

    def basis(self, z):
        """e_j(z) for j = 0..n; shape z.shape + (n+1,)."""
        z = np.asarray(z, dtype=complex)
        j = np.arange(self.n + 1)
        with np.errstate(divide="ignore"):
            lm = 0.5 * self.log_c + j * np.log(np.abs(z))[..., None]
        lm[..., 0] = 0.5 * self.log_c[0]
        return np.exp(lm + 1j * j * np.angle(z)[..., None])

    def kernel(self, z, w, coeffs=None):
        """sum_{j,l} A_jl e_j(z) conj e_l(w) with A = coeffs (identity by default)."""
        ez, ew = self.basis(z), self.basis(w)
        if coeffs is None:
            return np.sum(ez * np.conj(ew), axis=-1)
        return np.einsum("...j,jl,...l->...", ez, np.asarray(coeffs), np.conj(ew))

    def intensity(self, z):
        """K_n(z, z), the one-point density with respect to mu."""
        return np.sum(np.abs(self.basis(z)) ** 2, axis=-1)

    def cdf(self, x):
        """Matrix P[Gamma_j <= x] for j = 0..n and the given squared radii."""
        return gamma_cdf_matrix(self.measure, np.arange(self.n + 1), np.atleast_1d(np.asarray(x, dtype=float)))


# ---- sampling ---------------------------------------------------------------------

def sample_moduli(model, rng):
    """Sorted moduli of one realization (sqrt of independent Gamma_0..Gamma_n)."""
    return np.sort(np.sqrt(sample_gamma_ladder(model.measure, model.n, rng)))


def _draw_angle(a, rng):
    """theta with density proportional to |sum_j a_j e^{i j theta}|^2, by rejection."""
    env = np.sum(np.abs(a)) ** 2
    j = np.arange(a.size)
    while True:
        th = 2.0 * np.pi * rng.random(32)
        val = np.abs(np.exp(1j * np.outer(th, j)) @ a) ** 2
        hit = np.nonzero(rng.random(32) * env < val)[0]
        if hit.size:
            return th[hit[0]]


def _scaled_basis(model, z):
    """e_j(z) divided by its largest entry (direction only)."""
    j = np.arange(model.n + 1)
    lm = 0.5 * model.log_c + j * np.log(abs(z)) if z != 0 else np.where(j == 0, 0.0, -np.inf)
    return np.exp(lm - lm.max() + 1j * j * np.angle(z))


def _sample_projection(model, Q, rng, seed=0):
    """Points of the DPP projecting onto the columns of Q (coefficients in the e_j basis).

    Each step picks a column m uniformly: the next point's density is the average over
    columns of |g_m|^2 d mu with g_m = sum_j conj(Q_jm) e_j. A Householder reflection
    then removes the direction of the new point from the remaining columns.
    """
    Q = np.array(Q, dtype=complex)
    pts = []
    hl = 0.5 * model.log_c
    js = np.arange(model.n + 1)
    while Q.shape[1]:
        b = np.conj(Q[:, rng.integers(Q.shape[1])])
        p = np.abs(b) ** 2
        j = int(rng.choice(js, p=p / p.sum()))
        x = float(sample_gamma(GammaVariate(j, model.measure), rng))
        r = np.sqrt(x)
        if r > 0:
            la = hl + js * np.log(r)
            a = b * np.exp(la - la[b != 0].max())
            th = _draw_angle(a, rng)
        else:
            th = 0.0
        z = r * np.exp(1j * th)
        v = _scaled_basis(model, z)
        y = np.conj(Q).T @ v
        ny = np.linalg.norm(y)
        if ny * ny < COND_TOL * np.vdot(v, v).real:
            raise ConditioningFailure("new point is numerically in the span of earlier ones",
                                      seed=seed, step=len(pts))
        u = y.copy()
        u[0] += np.exp(1j * np.angle(y[0])) * ny if y[0] != 0 else ny
        u /= np.linalg.norm(u)
        Q = (Q - 2.0 * np.outer(Q @ u, np.conj(u)))[:, 1:]
        pts.append(z)
    return np.array(pts, dtype=complex)


def sample_full(model, rng, seed=0, n_max=N_MAX):
    """One realization of the rank-(n+1) projection process as planar points."""
    if model.n > n_max:
        raise BadParams("rank above n_max; full sampling is not conditioned reliably there",
                        n=model.n, n_max=n_max)
    pts = _sample_projection(model, np.eye(model.n + 1), rng, seed)
    return PointConfiguration(pts, np.inf, model.tag, seed, {"rank": model.rank})


def _check_contraction(A, what):
    lam = np.linalg.eigvalsh(A)
    if lam.min() < -1e-12 or lam.max() > 1 + 1e-12:
        raise NotContraction(f"{what} has eigenvalues outside [0, 1]",
                             min_eig=float(lam.min()), max_eig=float(lam.max()))
    return lam


def sample_kernel(model, A, rng, seed=0):
    """Sample the process with Hermitian coefficient matrix 0 <= A <= I.

    Eigenvectors are kept independently with probability equal to their eigenvalue,
    then the resulting projection process is sampled.
    """
    A = np.asarray(A, dtype=complex)
    _check_contraction(A, "kernel")
    lam, vec = np.linalg.eigh(A)
    keep = rng.random(lam.size) < np.clip(lam, 0.0, 1.0)
    pts = _sample_projection(model, vec[:, keep], rng, seed)
    return PointConfiguration(pts, np.inf, model.tag, seed, {"rank": int(keep.sum())})


# ---- Palm overlap ------------------------------------------------------------------

@dataclass(frozen=True)
class PalmOverlapEstimate:
    n: int
    replicas: int
    mean_min: float
    standard_error: float


def palm_log_theta(model, n, rng, size):
    """log theta_n = sum_{i<n} log(Gamma_i / mu_i) for ``size`` independent draws."""
    if n == 0:
        return np.zeros(size)
    lad = model.ladder if model.ladder.J >= n else compute_moments(model.measure, n)
    g = sample_gamma_ladder(model.measure, n - 1, rng, size=size)
    with np.errstate(divide="ignore"):
        return np.sum(np.log(g), axis=1) - np.sum(np.log(lad.mu[:n]))


def palm_overlap(model, n, replicas, rng):
    """Monte Carlo estimate of E[theta_n ^ 1] under the rank-n process."""
    if replicas < 100:
        raise BadParams("need at least 100 replicas", replicas=replicas)
    if n == 0:
        return PalmOverlapEstimate(0, int(replicas), 1.0, 0.0)
    vals = np.minimum(np.exp(np.minimum(palm_log_theta(model, n, rng, replicas), 0.0)), 1.0)
    m, se = pairwise_mean_se(vals)
    return PalmOverlapEstimate(int(n), int(replicas), float(m), float(se))


def palm_sweep(measure, ns, replicas, master_seed):
    """palm_overlap for each n, replica stream k for the k-th entry of ns."""
    from .seeding import replica_rng

    model = RadialDppModel(measure, max(max(ns), 1))
    return [palm_overlap(model, int(n), replicas, replica_rng(master_seed, k)) for k, n in enumerate(ns)]


# ---- linear statistics ---------------------------------------------------------------

@dataclass(frozen=True)
class DiskIndicator:
    """1 on |z| < radius."""

    radius: float

    def profile(self, r):
        return (np.abs(np.asarray(r, dtype=float)) < self.radius).astype(float)


def _radial_expectations(model, funcs, order=16, panels=8):
    """E[prod_f f(sqrt Gamma_j)] for j = 0..n, for radial test functions and disk indicators.

    Uses E[h 1(r < c)] = h(c-) F(c^2) - int_0^c h'(r) F(r^2) dr with F the CDF of Gamma_j.
    """
    smooth = [f for f in funcs if not isinstance(f, DiskIndicator)]
    for f in smooth:
        if getattr(f, "k", 0):
            raise BadParams("only radial inputs are supported", k=f.k)
    cut = min([f.radius for f in funcs if isinstance(f, DiskIndicator)] + [np.inf])
    brk = [0.0]
    for f in smooth:
        brk.extend(np.asarray(f.breakpoints, dtype=float))
        brk.append(f.outer_radius)
    if np.isfinite(cut):
        brk.append(cut)
    else:
        cut = max(brk)
    brk = np.unique(np.clip(brk, 0.0, cut))
    n1 = model.n + 1
    out = np.ones(n1) * np.prod([float(f.profile(cut)) for f in smooth]) if smooth else np.ones(n1)
    out = out * model.cdf(cut * cut)[:, 0]
    brk = brk[brk > 0]
    if smooth:
        # resolve the region where the Gamma_j CDFs move from 0 to 1
        span = np.geomspace(0.1 * np.sqrt(model.ladder.mu[0]), np.sqrt(_quantile_outer(model, 1 - 1e-14)), 65)
        brk = np.unique(np.concatenate([brk, span[(span > brk[0]) & (span < brk[-1])]]))
    if smooth and brk.size > 1:
        # h' vanishes below the smallest plateau radius; integrate in log r
        u, w = piecewise_gauss_legendre(np.log(brk), order, panels)
        r = np.exp(u)
        w = w * r
        vals = [f.profile(r) for f in smooth]
        ders = [f.profile_d1(r) for f in smooth]
        dh = np.zeros_like(r)
        for i in range(len(smooth)):
            term = ders[i].copy()
            for k in range(len(smooth)):
                if k != i:
                    term = term * vals[k]
            dh += term
        out = out - model.cdf(r * r) @ (w * dh)
    return out


def covariance_exact(model, phi, psi, order=16, panels=8):
    """Cov(sum phi, sum psi) for radial inputs: sum over j of Cov under Gamma_j."""
    e_pq = _radial_expectations(model, [phi, psi], order, panels)
    e_p = _radial_expectations(model, [phi], order, panels)
    e_q = _radial_expectations(model, [psi], order, panels)
    return float(np.sum(e_pq - e_p * e_q))


def number_variance(model, R):
    p = model.cdf(R * R)[:, 0]
    return float(np.sum(p * (1.0 - p)))


def reproducing_residual(model, x, y, panels=200, order=16):
    """|int K(x,z) K(z,y) d mu(z) - K(x,y)| / |K(x,y)| by direct quadrature."""
    meas = model.measure
    t0, h0 = meas._peak(0)
    lo, _ = meas._t_range(0, t0, h0)
    t1, h1 = meas._peak(model.n)
    _, hi = meas._t_range(model.n, t1, h1)
    t, wt = gauss_legendre(lo, hi, order, panels)
    s = np.exp(t)
    dens = np.exp(meas.log_weight(s) - meas.log_partial_moment(0)) * s * wt
    n_th = 2 * (model.n + 2)
    th = 2.0 * np.pi * np.arange(n_th) / n_th
    z = np.sqrt(s)[:, None] * np.exp(1j * th)[None, :]
    integrand = model.kernel(x, z) * model.kernel(z, y)
    val = np.sum(dens * integrand.mean(axis=1))
    ref = model.kernel(x, y)
    return float(abs(val - ref) / abs(ref))


# ---- tail sums ----------------------------------------------------------------------

def rho_tail(model, R, a=2.0):
    """sum_j P[Gamma_j <= R^2] P[Gamma_j >= a^2 R^2]."""
    if not a > 1:
        raise BadParams("a must exceed 1", a=a)
    if R <= 0:
        return 0.0
    js = np.arange(model.n + 1)
    F = gamma_cdf_matrix(model.measure, js, [R * R])[:, 0]
    S = gamma_sf_matrix(model.measure, js, [a * a * R * R])[:, 0]
    return float(np.sum(F * S))


def telescoping_terms(model, R, a=2.0):
    """The two radial contributions to int_{|z|,|w| <= aR} |z|^2 - z conj w against |K_n|^2.

    With T = a^2 R^2 and E[Gamma_j 1(Gamma_j <= T)] = mu_j P[Gamma_{j+1} <= T]:
    square = sum_{j<n} E[Gamma_j 1] P[Gamma_j <= T],
    cross  = sum_{j<n-1} E[Gamma_j 1] P[Gamma_{j+1} <= T].
    Their difference telescopes and is at most T.
    """
    T = a * a * R * R
    n = model.n
    mu = model.ladder.mu
    F = gamma_cdf_matrix(model.measure, np.arange(n + 1), [T])[:, 0]
    trunc = mu[:n] * F[1 : n + 1]
    square = float(np.sum(trunc * F[:n]))
    cross = float(np.sum(trunc[: n - 1] * F[1:n])) if n > 1 else 0.0
    return {"square": square, "cross": cross, "difference": square - cross, "bound": T}


# ---- mixture of determinantal processes --------------------------------------------

def mixture_identity_check(M, u, rtol=1e-10):
    """det(M + uu*)/2 + det(M)/2 == det(M + uu*/2) up to rtol times the largest term."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    if M.shape[0] > 12:
        raise BadParams("dimension above 12", dim=M.shape[0])
    uu = np.outer(u, np.conj(u))
    a, b, c = np.linalg.det(M + uu), np.linalg.det(M), np.linalg.det(M + 0.5 * uu)
    scale = max(abs(a), abs(b), abs(c), 1e-300)
    return bool(abs(0.5 * a + 0.5 * b - c) <= rtol * scale)


@dataclass
class MixtureReport:
    count_values: dict
    count_frequencies: dict
    one_point: list  # (r_in, r_out, mc_mean, se, predicted)
    two_point: list  # (annulus i, annulus i+1, mc_mean, se, predicted)
    max_z_score: float
    replicas: int


def _annulus_probs(model, edges):
    F = model.cdf(np.asarray(edges, dtype=float) ** 2)
    return np.diff(F, axis=1)  # (n+1, n_annuli)


def mixture_demo(model, f_coeffs, master_seed, replicas=2000, base=None, edges=None, threads=None):
    """Sample (1/2) Pi_0 + (1/2) Pi_1 with kernels base -/+ f f*/2 and compare annulus
    counts against the determinantal prediction of ``base``.
    """
    N = model.n + 1
    A = np.eye(N, dtype=complex) if base is None else np.asarray(base, dtype=complex)
    f = np.asarray(f_coeffs, dtype=complex)
    if A.shape != (N, N) or f.shape != (N,):
        raise BadParams("coefficient shapes must match the model rank", rank=N)
    ff = 0.5 * np.outer(f, np.conj(f))
    L = (A - ff, A + ff)
    for k, Lk in enumerate(L):
        _check_contraction(Lk, f"L{k}")
    if edges is None:
        edges = _equal_mass_edges(model, np.real(np.diag(A)), 5)
    edges = np.asarray(edges, dtype=float)

    def one(rng, seed, i):
        xi = int(rng.random() < 0.5)
        cfg = sample_kernel(model, L[xi], rng, seed)
        counts = np.histogram(np.abs(cfg.points), bins=edges)[0]
        return len(cfg), counts

    res = replica_map(one, master_seed, replicas, threads)
    totals = np.array([t for t, _ in res])
    counts = np.array([c for _, c in res], dtype=float)
    P = _annulus_probs(model, edges)
    d = np.real(np.diag(A))
    pred1 = d @ P
    absA2 = np.abs(A) ** 2
    one_rows, two_rows, zmax = [], [], 0.0
    for i in range(P.shape[1]):
        m, se = pairwise_mean_se(counts[:, i])
        one_rows.append((float(edges[i]), float(edges[i + 1]), float(m), float(se), float(pred1[i])))
        zmax = max(zmax, abs(m - pred1[i]) / max(se, 1.0 / replicas))
    for i in range(P.shape[1] - 1):
        prod = counts[:, i] * counts[:, i + 1]
        m, se = pairwise_mean_se(prod)
        pred = pred1[i] * pred1[i + 1] - P[:, i] @ absA2 @ P[:, i + 1]
        two_rows.append((i, i + 1, float(m), float(se), float(pred)))
        zmax = max(zmax, abs(m - pred) / max(se, 1.0 / replicas))
    vals, freq = np.unique(totals, return_counts=True)
    return MixtureReport(
        count_values={int(v): int(c) for v, c in zip(vals, freq)},
        count_frequencies={int(v): float(c) / replicas for v, c in zip(vals, freq)},
        one_point=one_rows,
        two_point=two_rows,
        max_z_score=float(zmax),
        replicas=int(replicas),
    )


def _quantile_outer(model, q=0.99):
    """A squared radius below which Gamma_n falls with probability about q."""
    lo, hi = model.measure.support
    if np.isfinite(hi):
        return hi
    x = max(model.ladder.mu[model.n], 1.0)
    while model.cdf(x)[-1, 0] < q:
        x *= 1.5
    return x


def _equal_mass_edges(model, weights, k):
    """Radii splitting the expected count sum_j w_j P[Gamma_j <= r^2] into k equal parts;
    the last edge leaves about 1% of the mass outside."""
    hi = _quantile_outer(model)
    x = np.linspace(0.0, hi, 2001)
    cum = weights @ model.cdf(x)
    levels = cum[-1] * np.arange(1, k) / k
    inner = np.interp(levels, cum, x)
    return np.sqrt(np.concatenate([[0.0], inner, [hi]]))
