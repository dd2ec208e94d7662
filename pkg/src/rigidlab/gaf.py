"""Zeros of the Gaussian entire function sum_k xi_k z^k / (k!)^{alpha/2}.

alpha = 1 is the planar GEF. Everything that touches (k!)^alpha is kept in log
form; the kernel K(z, w) = sum_k (z conj w)^k / (k!)^alpha is evaluated as a
scaled sum ``exp(shift) * S``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import BadParams, RootFindingDiverged
from .points import PointConfiguration
from .roots import aberth
from .special import dilog

# exp(-700) is near the smallest normal double; beyond this the scaled polynomial underflows
_MAX_DYNAMIC_RANGE = 650.0
BOUNDARY_BAND = 1e-9
RESIDUAL_TOL = 1e-8
_G_CUTOFF = 50.0


def _log_terms(alpha, log_t, k):
    """log of t^k / (k!)^alpha."""
    return k * log_t - alpha * gammaln(k + 1.0)


def truncation_degree(alpha, R, tail_tol):
    """Smallest K with sum_{k>K} R^{2k}/(k!)^alpha <= tail_tol * sum_{k<=K} (same terms)."""
    if not R > 0:
        raise BadParams("window radius must be positive", R=R)
    if not 0 < tail_tol < 1:
        raise BadParams("tail_tol must lie in (0, 1)", tail_tol=tail_tol)
    log_t = 2.0 * np.log(R)
    peak = max(R ** (2.0 / alpha), 1.0)
    n = int(peak + 40 * np.sqrt(peak / alpha) + 200)
    while True:
        k = np.arange(n, dtype=float)
        lt = _log_terms(alpha, log_t, k)
        # terms beyond n are geometrically smaller than the last one once past the peak
        if lt[-1] < lt.max() + np.log(tail_tol) - 60 and lt[-1] < lt[-2]:
            break
        n *= 2
    head = np.logaddexp.accumulate(lt)
    tail = np.logaddexp.accumulate(lt[::-1])[::-1]
    ok = np.nonzero(tail[1:] - head[:-1] <= np.log(tail_tol))[0]
    return int(ok[0])


@dataclass(frozen=True)
class GafModel:
    alpha: float
    R: float
    tail_tol: float = 1e-12
    K: Optional[int] = None
    c_var: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise BadParams("alpha must be positive", alpha=self.alpha)
        if self.K is None:
            object.__setattr__(self, "K", truncation_degree(self.alpha, self.R, self.tail_tol))

    @property
    def rigidity_level(self):
        """Smallest integer k with 1/k < alpha."""
        return int(np.floor(1.0 / self.alpha)) + 1

    @property
    def tag(self):
        return f"gaf(alpha={self.alpha},R={self.R},K={self.K})"


# ---- zero sets --------------------------------------------------------------

def zeros_from_coefficients(log_mag, phase, R, seed=0, tag="polynomial", max_iter=200):
    """Zeros inside |z| < R of sum_k exp(log_mag_k + i phase_k) z^k.

    Works in w = z / R with the largest scaled coefficient normalized to one.
    Roots within 1e-9 of the circle |z| = R are dropped and counted in metadata.
    """
    log_mag = np.asarray(log_mag, dtype=float)
    k = np.arange(log_mag.size)
    lb = log_mag + k * np.log(R)
    lb = lb - lb.max()
    b = np.exp(lb) * np.exp(1j * np.asarray(phase, dtype=float))
    nz = np.nonzero(b)[0]
    b = b[: nz[-1] + 1]
    lead = int(nz[0])
    roots, res, iters, ok = aberth(np.ascontiguousarray(b[lead:]), max_iter)
    if not ok:
        raise RootFindingDiverged("Aberth iteration cap reached", seed=seed, iterations=int(iters))
    roots = np.concatenate([np.zeros(lead, complex), roots]) * R
    res = np.concatenate([np.zeros(lead), res])
    mod = np.abs(roots)
    inside = mod < R - BOUNDARY_BAND * R
    boundary = int(np.count_nonzero(np.abs(mod - R) <= BOUNDARY_BAND * R))
    if inside.any() and res[inside].max() > RESIDUAL_TOL:
        raise RootFindingDiverged("root residual above tolerance", seed=seed, residual=float(res[inside].max()))
    meta = {"boundary_dropped": boundary, "iterations": int(iters),
            "max_residual": float(res[inside].max()) if inside.any() else 0.0, "degree": int(b.size - 1 + lead)}
    return PointConfiguration(roots[inside], R, tag, seed, meta)


def sample_coefficients(model, rng):
    """Standard complex Gaussian xi_k (E|xi|^2 = 1) returned as (log|a_k|, arg a_k)."""
    xi = (rng.standard_normal(model.K + 1) + 1j * rng.standard_normal(model.K + 1)) / np.sqrt(2.0)
    k = np.arange(model.K + 1, dtype=float)
    return np.log(np.abs(xi)) - 0.5 * model.alpha * gammaln(k + 1.0), np.angle(xi)


def coefficient_log_range(model):
    """Half the log-range of the window-scaled coefficients (nats)."""
    k = np.arange(model.K + 1.0)
    return 0.5 * float(np.max(_log_terms(model.alpha, 2 * np.log(model.R), k)))


def sample_zero_set(model, rng, seed=0):
    span = coefficient_log_range(model)
    if span > _MAX_DYNAMIC_RANGE:
        raise BadParams(
            "coefficient range exceeds double precision at this window; reduce R",
            alpha=model.alpha, R=model.R, log_range=span,
        )
    log_mag, phase = sample_coefficients(model, rng)
    return zeros_from_coefficients(log_mag, phase, model.R, seed, model.tag)


# ---- the series g(t, beta) ------------------------------------------------

def g_eval(t, beta):
    """log sum_k t^k / (k!)^beta, summed outward from k* = floor(t^{1/beta}).

    Log-ratios to the k* term are accumulated as j (log t - beta log k*) -
    beta sum_i log1p(i/k*), which keeps them accurate when log g is large.
    Each direction stops once terms are decreasing and 50 nats below k*.
    """
    if t < 0:
        raise BadParams("t must be nonnegative", t=t)
    if t == 0:
        return 0.0
    log_t = np.log(t)
    ks = int(np.floor(np.exp(log_t / beta)))
    log_top = ks * log_t - beta * gammaln(ks + 1.0)
    chunk = min(int(64 + 16 * np.sqrt(max(ks, 1) / beta)), 1 << 20)
    parts = [np.zeros(1)]
    if ks == 0:
        j = np.arange(1, chunk + 1, dtype=float)
        parts.append(j * log_t - beta * gammaln(j + 1.0))
        return float(log_top + logsumexp(np.concatenate(parts)))
    drift = log_t - beta * np.log(ks)
    for sign in (1, -1):
        j0, acc = 0, 0.0
        while True:
            j = np.arange(j0 + 1, j0 + chunk + 1, dtype=float)
            if sign < 0:
                j = j[j <= ks]
                if j.size == 0:
                    break
                # a_{k*-j}/a_{k*} = exp(-j drift) prod_{i<j} (1 - i/k*)^beta
                steps = np.log1p(-(j - 1.0) / ks)
            else:
                steps = np.log1p(j / ks)
            cum = acc + np.cumsum(steps)
            acc = cum[-1]
            lr = sign * (j * drift - beta * cum)
            parts.append(lr)
            j0 += chunk
            if lr.size > 1 and lr[-1] < -_G_CUTOFF and lr[-1] < lr[-2]:
                break
    return float(log_top + logsumexp(np.concatenate(parts)))


def g_asymptotic_ratio(t, beta):
    """g(t, beta) / (t^{-1/2} e^{beta t^{1/beta}} sqrt(t^{1/beta}))."""
    if t < 1:
        raise BadParams("t must be at least 1", t=t)
    log_t = np.log(t)
    log_ref = -0.5 * log_t + beta * np.exp(log_t / beta) + 0.5 * log_t / beta
    return float(np.exp(g_eval(t, beta) - log_ref))


# ---- kernel, correlation and first intensity -----------------------------

def _scaled_kernel(alpha, K, u):
    """K(u) = sum_{j<=K} u^j/(j!)^alpha as (shift, S) with K = exp(shift) * S."""
    u = np.asarray(u, dtype=complex)
    flat = u.ravel()
    j = np.arange(K + 1, dtype=float)
    shifts = np.empty(flat.size)
    sums = np.empty(flat.size, dtype=complex)
    with np.errstate(divide="ignore"):
        lmod = np.log(np.abs(flat))
    ang = np.angle(flat)
    for lo in range(0, flat.size, 512):
        sl = slice(lo, lo + 512)
        with np.errstate(invalid="ignore"):
            lt = j[None, :] * lmod[sl, None] - alpha * gammaln(j + 1.0)[None, :]
        lt[:, 0] = 0.0
        lt[np.isnan(lt)] = -np.inf
        m = lt.max(axis=1)
        sums[sl] = np.sum(np.exp(lt - m[:, None] + 1j * j[None, :] * ang[sl, None]), axis=1)
        shifts[sl] = m
    return shifts.reshape(u.shape), sums.reshape(u.shape)


def gaf_kernel(model, z, w):
    """Truncated covariance kernel E f(z) conj f(w)."""
    shift, s = _scaled_kernel(model.alpha, model.K, np.asarray(z) * np.conj(w))
    return np.exp(shift) * s


def correlation(model, z, w):
    """theta = K(z,w)/sqrt(K(z,z) K(w,w))."""
    z, w = np.broadcast_arrays(np.asarray(z, complex), np.asarray(w, complex))
    s_zw, v_zw = _scaled_kernel(model.alpha, model.K, z * np.conj(w))
    s_zz, v_zz = _scaled_kernel(model.alpha, model.K, np.abs(z) ** 2)
    s_ww, v_ww = _scaled_kernel(model.alpha, model.K, np.abs(w) ** 2)
    mag = np.exp(s_zw - 0.5 * (s_zz + s_ww))
    return mag * v_zw / np.sqrt(v_zz.real * v_ww.real)


def psi_alpha(model, z, w):
    """Li2(|theta|^2), the covariance of log-moduli up to the factor 1/4."""
    th2 = np.clip(np.abs(correlation(model, z, w)) ** 2, 0.0, 1.0)
    return dilog(th2)


def _index_moments(alpha, K, t):
    """Mean and variance of k under weights t^k/(k!)^alpha, k <= K."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    k = np.arange(K + 1, dtype=float)
    mean = np.empty(t.size)
    var = np.empty(t.size)
    for i, tt in enumerate(t):
        if tt <= 0:
            mean[i], var[i] = 0.0, 0.0
            continue
        lt = _log_terms(alpha, np.log(tt), k)
        p = np.exp(lt - logsumexp(lt))
        mean[i] = p @ k
        var[i] = p @ (k - mean[i]) ** 2
    return mean, var


def first_intensity(model, z):
    """(1/4 pi) Laplacian of log K(z,z) = Var_t[k] / (pi t) at t = |z|^2."""
    t = np.abs(np.atleast_1d(np.asarray(z))) ** 2
    _, var = _index_moments(model.alpha, model.K, t)
    out = np.where(t > 0, var / np.where(t > 0, t, 1.0), 1.0) / np.pi
    return out if np.ndim(z) else float(out[0])


def expected_count(model, radius):
    """Expected number of zeros in |z| < radius: the mean index at t = radius^2."""
    mean, _ = _index_moments(model.alpha, model.K, np.asarray(radius, dtype=float) ** 2)
    return mean if np.ndim(radius) else float(mean[0])


def expected_linear_statistic(model, phi):
    """E sum phi(z) for a radial (k = 0) test function: -int phi'(r) N(r) dr."""
    from .special import piecewise_gauss_legendre

    if getattr(phi, "k", 0):
        return 0.0
    r, w = piecewise_gauss_legendre(np.concatenate([[phi.inner_radius], phi.breakpoints]), 16, 8)
    return float(-np.sum(w * phi.profile_d1(r) * expected_count(model, r)))


# ---- variance of linear statistics ----------------------------------------

def _radial_rule(phi, order, panels):
    from .special import piecewise_gauss_legendre

    r, w = piecewise_gauss_legendre(np.asarray(phi.breakpoints), order, panels)
    lap = phi.laplacian(r)
    keep = lap != 0
    return r[keep], w[keep], lap[keep]


def _band(alpha, K, log_u, nats=50.0):
    """Index interval of terms within ``nats`` of the largest term of K(e^{log_u})."""
    m = np.arange(K + 1, dtype=float)
    lt = m * log_u - alpha * gammaln(m + 1.0)
    idx = np.nonzero(lt > lt.max() - nats)[0]
    return int(idx[0]), int(idx[-1])


def _angular_modes(alpha, K, log_r, shift_diag, sum_diag, pairs, k, n_angle):
    """For each node pair (i, j): int_0^{2 pi} cos(k d) Li2(|theta(r_i, r_j e^{i d})|^2) dd.

    Pairs are processed in order of r_i r_j so that each chunk only needs the
    band of kernel terms that are significant for its products.
    """
    log_u = log_r[pairs[:, 0]] + log_r[pairs[:, 1]]
    order = np.argsort(log_u, kind="stable")
    delta = 2.0 * np.pi * np.arange(n_angle) / n_angle
    cos_k = np.cos(k * delta)
    out = np.empty(len(pairs))
    for lo in range(0, len(pairs), 256):
        sel = order[lo:lo + 256]
        ii, jj = pairs[sel].T
        lu = log_u[sel]
        m_lo, _ = _band(alpha, K, lu[0])
        _, m_hi = _band(alpha, K, lu[-1])
        m = np.arange(m_lo, m_hi + 1, dtype=float)
        lc = m[None, :] * lu[:, None] - alpha * gammaln(m + 1.0)[None, :]
        top = lc.max(axis=1)
        fold = n_angle * int(np.ceil(m.size / n_angle))
        c = np.zeros((sel.size, fold))
        c[:, : m.size] = np.exp(lc - top[:, None])
        # folding coefficients mod n_angle leaves |K| at the sample angles unchanged
        vals = np.fft.fft(c.reshape(sel.size, -1, n_angle).sum(axis=1), axis=1)
        scale = np.exp(2 * top - shift_diag[ii] - shift_diag[jj]) / (sum_diag[ii] * sum_diag[jj])
        th2 = np.clip(np.abs(vals) ** 2 * scale[:, None], 0.0, 1.0)
        out[sel] = (2.0 * np.pi / n_angle) * (dilog(th2) @ cos_k)
    return out


def _angle_count(alpha, K, r_max):
    # number of kernel terms within 40 nats of the peak sets the angular bandwidth
    lt = _log_terms(alpha, 2 * np.log(r_max), np.arange(K + 1.0))
    band = int(np.count_nonzero(lt > lt.max() - 40.0))
    return int(max(64, 2 ** int(np.ceil(np.log2(2 * band + 1)))))


def variance_exact(model, phi, L, order=16, panels=4, n_angle=None):
    """c_var * int int Lap phi_L(z) conj(Lap phi_L(w)) Li2(|theta(z,w)|^2) dm dm.

    For the moment family this is E|S - E S|^2 of the complex statistic. The
    truncated kernel of ``model`` is used, so the window should cover the
    support of the scaled test function. With c_var = 1/(16 pi^2) this is the
    variance itself.
    """
    f = phi.scaled(L)
    r, w, lap = _radial_rule(f, order, panels)
    if r.size == 0:
        return 0.0
    K = model.K
    if n_angle is None:
        n_angle = _angle_count(model.alpha, K, r.max())
    shift, sums = _scaled_kernel(model.alpha, K, r * r)
    sums = sums.real
    iu, ju = np.triu_indices(r.size)
    modes = _angular_modes(model.alpha, K, np.log(r), shift, sums, np.stack([iu, ju], axis=1), f.k, n_angle)
    wt = w * lap * r
    mult = np.where(iu == ju, 1.0, 2.0)
    total = 2.0 * np.pi * np.sum(mult * wt[iu] * wt[ju] * modes)
    if not np.isfinite(total):
        from .errors import QuadratureFailure

        raise QuadratureFailure("non-finite variance integral", L=L)
    return float(model.c_var * total)


def variance_bound(model, phi, L, C_beta=1.0, order=16, panels=8):
    """8 pi^2 C_beta int int |Lap phi(r) Lap phi(s)| exp(-alpha L^{2/alpha} (r^{1/alpha} - s^{1/alpha})^2)
    L^{-1/alpha} (r s)^{1 - 1/(2 alpha)} dr ds for the unit-scale ``phi``.

    8 pi^2 is the angular volume 4 pi^2 times the factor 2 from Li2(x) <= 2x,
    so the value bounds variance_exact / c_var once C_beta dominates the ratio
    computed by :func:`bound_ratio_constant`. The inner integral is taken in
    v = s^{1/alpha}, split at s-breakpoints and at +-8 widths of the Gaussian.
    """
    a = model.alpha
    r, w, lap = _radial_rule(phi, order, panels)
    if r.size == 0:
        return 0.0
    stiff = a * L ** (2.0 / a)
    width = 1.0 / np.sqrt(2.0 * stiff)
    vb = np.asarray(phi.breakpoints) ** (1.0 / a)
    expo = 1.0 - 1.0 / (2.0 * a)
    gx, gw = np.polynomial.legendre.leggauss(order)
    u = r ** (1.0 / a)
    marks = np.clip(u[:, None] + width * np.arange(-8, 9)[None, :], vb[0], vb[-1])
    edges = np.sort(np.concatenate([np.broadcast_to(vb, (r.size, vb.size)), marks], axis=1), axis=1)
    half = 0.5 * np.diff(edges, axis=1)
    mid = 0.5 * (edges[:, 1:] + edges[:, :-1])
    v = mid[:, :, None] + half[:, :, None] * gx
    vw = half[:, :, None] * gw
    s = v**a
    f = vw * a * v ** (a - 1.0) * np.abs(phi.laplacian(s)) * s**expo * np.exp(-stiff * (u[:, None, None] - v) ** 2)
    total = np.sum(w * np.abs(lap) * r**expo * f.sum(axis=(1, 2)))
    return float(8.0 * np.pi**2 * C_beta * total * L ** (-1.0 / a))


def theta_square_integral(model, phi, L, order=16, panels=4):
    """8 pi^2 int int |Lap phi(r) Lap phi(s)| g(L^4 r^2 s^2, 2 alpha) / (g(L^2 r^2, alpha) g(L^2 s^2, alpha)) r s dr ds."""
    a = model.alpha
    r, w, lap = _radial_rule(phi, order, panels)
    lg1 = np.array([g_eval((L * x) ** 2, a) for x in r])
    tot = 0.0
    for i in range(r.size):
        lg2 = np.array([g_eval((L * L * r[i] * x) ** 2, 2 * a) for x in r])
        tot += np.sum(w[i] * w * np.abs(lap[i] * lap) * r[i] * r * np.exp(lg2 - lg1[i] - lg1))
    return float(8.0 * np.pi**2 * tot)


def bound_ratio_constant(alpha, t_min, t_max, n=25):
    """Largest ratio of g(tu, 2 alpha)/(g(t, alpha) g(u, alpha)) to
    exp(-alpha (t^{1/(2 alpha)} - u^{1/(2 alpha)})^2) (tu)^{-1/(4 alpha)} over a log grid of [t_min, t_max]^2.
    """
    ts = np.exp(np.linspace(np.log(t_min), np.log(t_max), n))
    lg = np.array([g_eval(t, alpha) for t in ts])
    best = 0.0
    for i, t in enumerate(ts):
        for j in range(i, n):
            u = ts[j]
            num = g_eval(t * u, 2 * alpha) - lg[i] - lg[j]
            ref = -alpha * (t ** (0.5 / alpha) - u ** (0.5 / alpha)) ** 2 - np.log(t * u) / (4 * alpha)
            best = max(best, float(np.exp(num - ref)))
    return best


# ---- Monte Carlo cross-checks ------------------------------------------------

def linear_statistic(config, phi):
    return complex(np.sum(phi.value(config.points))) if getattr(phi, "k", 0) else float(np.sum(phi.value(config.points)))


def monte_carlo_statistics(model, phis, replicas, master_seed, threads=None):
    """Array (replicas, len(phis)) of linear statistics from independent zero sets."""
    from .seeding import replica_map

    def one(rng, seed, i):
        cfg = sample_zero_set(model, rng, seed)
        return [linear_statistic(cfg, p) for p in phis]

    return np.array(replica_map(one, master_seed, replicas, threads))


def calibrate(model, phi, Ls, replicas, master_seed, threads=None):
    """Least-squares c_var matching Monte Carlo variances at scales ``Ls``.

    Returns (c_var, details) where details lists (L, mc_variance, mc_se, exact_over_c_var).
    """
    base = GafModel(model.alpha, model.R, model.tail_tol, model.K, 1.0)
    vals = monte_carlo_statistics(model, [phi.scaled(L) for L in Ls], replicas, master_seed, threads)
    rows = []
    for col, L in enumerate(Ls):
        x = vals[:, col]
        dev = np.abs(x - x.mean()) ** 2
        v = dev.sum() / (x.size - 1)
        se = dev.std(ddof=1) / np.sqrt(x.size)
        rows.append((float(L), float(v), float(se), variance_exact(base, phi, L)))
    ex = np.array([r[3] for r in rows])
    mc = np.array([r[1] for r in rows])
    return float(ex @ mc / (ex @ ex)), rows
