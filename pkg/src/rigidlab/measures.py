"""Radial probability measures on the plane, their moment ladders and size-biased variates.

A radial measure is described through the law of ``x = |z|^2``. For the index ``j``
the size-biased variable ``Gamma_j`` has density proportional to ``x^j`` against that
law, so ``E[Gamma_j] = mu_j = c_j / c_{j+1}`` with ``c_j^{-1} = E|z|^{2j}``.
"""

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize, special

from .errors import DivergentMoment, InsufficientLadder, QuadratureFailure, TableNotBuilt

# exp(-60) is far below double precision relative to the peak of the integrand
_TAIL_NATS = 60.0
_T_LIMIT = 700.0


@dataclass(frozen=True)
class GaussianPower:
    """Density proportional to |z|^a exp(-b |z|^c) on the plane."""

    a: float = 0.0
    b: float = 1.0
    c: float = 2.0


@dataclass(frozen=True)
class DiskUniform:
    radius: float = 1.0


@dataclass(frozen=True)
class Tabulated:
    """Weight samples ``w`` (strictly positive) on a grid ``x`` of the squared modulus.

    The weight is linearly interpolated between grid points and vanishes outside.
    """

    x: tuple
    w: tuple


@dataclass(frozen=True)
class RadialMeasure:
    family: object
    # inverse-CDF tables for Tabulated families, keyed by j -> (probabilities, x values)
    tables: Optional[dict] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        fam = self.family
        if isinstance(fam, GaussianPower):
            if fam.a < 0 or fam.b <= 0 or fam.c <= 0:
                raise ValueError(f"invalid GaussianPower parameters {fam}")
        elif isinstance(fam, DiskUniform):
            if fam.radius <= 0:
                raise ValueError("DiskUniform radius must be positive")
        elif isinstance(fam, Tabulated):
            x = np.asarray(fam.x, dtype=float)
            w = np.asarray(fam.w, dtype=float)
            if x.ndim != 1 or x.shape != w.shape or x.size < 2:
                raise ValueError("Tabulated needs matching 1-d x and w with at least two points")
            if np.any(np.diff(x) <= 0) or x[0] < 0:
                raise ValueError("Tabulated grid must be increasing and nonnegative")
            if np.any(w <= 0):
                raise ValueError("Tabulated weight must be strictly positive on its support")
        else:
            raise TypeError(f"unknown family {fam!r}")

    # -- description -----------------------------------------------------------------
    @property
    def name(self):
        fam = self.family
        if isinstance(fam, GaussianPower):
            if (fam.a, fam.b, fam.c) == (0.0, 1.0, 2.0):
                return "ginibre"
            return f"gaussian_power(a={fam.a},b={fam.b},c={fam.c})"
        if isinstance(fam, DiskUniform):
            return "bergman" if fam.radius == 1.0 else f"disk(radius={fam.radius})"
        return "tabulated"

    @property
    def support(self):
        """Support of the law of |z|^2 as (lo, hi)."""
        fam = self.family
        if isinstance(fam, GaussianPower):
            return 0.0, np.inf
        if isinstance(fam, DiskUniform):
            return 0.0, fam.radius**2
        return float(fam.x[0]), float(fam.x[-1])

    @property
    def closed_form(self):
        return not isinstance(self.family, Tabulated)

    def log_weight(self, x):
        """Unnormalized log density of |z|^2 (w.r.t. dx); -inf off the support."""
        x = np.asarray(x, dtype=float)
        fam = self.family
        with np.errstate(divide="ignore"):
            if isinstance(fam, GaussianPower):
                out = 0.5 * fam.a * np.log(x) - fam.b * x ** (0.5 * fam.c)
                if fam.a == 0:
                    out = np.where(x >= 0, -fam.b * x ** (0.5 * fam.c), -np.inf)
                return np.where(x >= 0, out, -np.inf)
            if isinstance(fam, DiskUniform):
                return np.where((x >= 0) & (x <= fam.radius**2), 0.0, -np.inf)
            gx = np.asarray(fam.x, dtype=float)
            w = np.interp(x, gx, np.asarray(fam.w, dtype=float))
            inside = (x >= gx[0]) & (x <= gx[-1])
            return np.where(inside, np.log(np.where(inside, w, 1.0)), -np.inf)

    # -- quadrature ------------------------------------------------------------------
    def _peak(self, j):
        """Location (in t = log x) and value of the maximum of (j+1) t + log w(e^t)."""
        fam = self.family
        lo, hi = self.support
        if isinstance(fam, GaussianPower):
            # d/dt: (j + 1 + a/2) - b (c/2) e^{ct/2} = 0
            s = j + 1.0 + 0.5 * fam.a
            t0 = (2.0 / fam.c) * np.log(s / (fam.b * 0.5 * fam.c))
        elif isinstance(fam, DiskUniform):
            t0 = np.log(hi)
        else:
            tlo = np.log(lo) if lo > 0 else np.log(hi) - _T_LIMIT / (j + 1.0)
            res = optimize.minimize_scalar(
                lambda t: -self._h(t, j), bounds=(tlo, np.log(hi)), method="bounded",
                options={"xatol": 1e-12},
            )
            cands = np.array([res.x, np.log(hi)] + ([np.log(lo)] if lo > 0 else []))
            t0 = cands[np.argmax([self._h(t, j) for t in cands])]
        return float(t0), float(self._h(t0, j))

    def _h(self, t, j):
        return (j + 1.0) * t + self.log_weight(np.exp(t))

    def _t_range(self, j, t0, h0):
        """Finite t-interval outside of which the integrand is below exp(-60) of its peak."""
        lo, hi = self.support
        t_lo_sup = np.log(lo) if lo > 0 else -np.inf
        t_hi_sup = np.log(hi) if np.isfinite(hi) else np.inf

        def walk(direction, limit):
            step = 1.0
            t = t0
            while True:
                nxt = t + direction * step
                if (direction < 0 and nxt <= limit) or (direction > 0 and nxt >= limit):
                    return limit
                if abs(nxt - t0) > _T_LIMIT * 4:
                    raise DivergentMoment(f"moment of order {j} does not converge", j=j)
                if self._h(nxt, j) - h0 < -_TAIL_NATS:
                    return nxt
                t = nxt
                step *= 1.5

        return walk(-1, t_lo_sup), walk(+1, t_hi_sup)

    def log_partial_moment(self, j, x_upper=np.inf):
        """log of the unnormalized integral  int_0^{x_upper} x^j w(x) dx."""
        t0, h0 = self._peak(j)
        if not np.isfinite(h0):
            raise QuadratureFailure(f"non-finite integrand peak for j={j}", j=j)
        a, b = self._t_range(j, t0, h0)
        if np.isfinite(x_upper):
            if x_upper <= 0:
                return -np.inf
            b = min(b, np.log(x_upper))
            if b <= a:
                # upper limit deep in the left tail: integrate there with its own scale
                a = b - _TAIL_NATS
        if not (np.isfinite(a) and np.isfinite(b)):
            raise DivergentMoment(f"moment of order {j} does not converge", j=j)
        href = max(h0 if a <= t0 <= b else self._h(b, j), self._h(a, j))
        pts = [t0] if a < t0 < b else None
        if isinstance(self.family, Tabulated):
            gx = np.asarray(self.family.x)
            brk = np.log(gx[gx > 0])
            brk = brk[(brk > a) & (brk < b)]
            pts = sorted(set((pts or []) + list(brk)))[:400] or None

        def f(t):
            return np.exp(self._h(t, j) - href)

        val, err = integrate.quad(f, a, b, points=pts, epsabs=0.0, epsrel=1e-13, limit=500)
        if not np.isfinite(val) or val <= 0:
            raise DivergentMoment(f"moment of order {j} is not finite", j=j)
        if err > 1e-10 * val:
            raise QuadratureFailure(f"quadrature tolerance not reached for j={j}", j=j, error=err)
        return href + np.log(val)

    def log_moment(self, j):
        """log E|z|^{2j} (normalized)."""
        return self.log_partial_moment(j) - self.log_partial_moment(0)

    # -- inverse-CDF tables for tabulated measures -----------------------------------
    def with_inverse_tables(self, j_max, n_grid=8193):
        """Return a copy carrying inverse-CDF tables for Gamma_0..Gamma_{j_max}."""
        lo, hi = self.support
        x = np.unique(np.concatenate([np.linspace(lo, hi, n_grid), np.asarray(self.family.x, dtype=float)]))
        lw = self.log_weight(x)
        tables = {}
        with np.errstate(divide="ignore"):
            logx = np.log(x)
        for j in range(j_max + 1):
            lf = lw + (j * logx if j else 0.0)
            lf = np.where(np.isfinite(lf), lf, -np.inf)
            f = np.exp(lf - lf.max())
            cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(x))])
            cdf /= cdf[-1]
            keep = np.concatenate([[True], np.diff(cdf) > 0])
            tables[j] = (cdf[keep], x[keep])
        return RadialMeasure(self.family, tables=tables)


def ginibre():
    """Standard complex Gaussian measure (density exp(-|z|^2)/pi)."""
    return RadialMeasure(GaussianPower(0.0, 1.0, 2.0))


def bergman():
    """Normalized Lebesgue measure on the unit disk."""
    return RadialMeasure(DiskUniform(1.0))


# -- moment ladder ---------------------------------------------------------------------
@dataclass(frozen=True)
class MomentLadder:
    """Diagnostic arrays indexed by j.

    ``log_c`` has J+5 entries, ``mu`` J+4, ``sigma`` J+3 and ``nu`` J+1, so every
    quantity is available for 0 <= j <= J.
    """

    J: int
    log_c: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    nu: np.ndarray
    measure_name: str = ""

    @property
    def log_mu(self):
        return self.log_c[:-1] - self.log_c[1:]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["j", "log_c", "mu", "sigma", "nu"])
        for j in range(self.J + 1):
            w.writerow([j, repr(float(self.log_c[j])), repr(float(self.mu[j])),
                        repr(float(self.sigma[j])), repr(float(self.nu[j]))])
        return buf.getvalue()


def ladder_from_log_c(log_c, measure_name=""):
    """Derive mu, sigma, nu from log c_0..c_{J+4}.

    sigma and nu are formed from differences of log mu with expm1 so the
    O(1/j) and O(1/j^2) values keep full relative precision.
    """
    log_c = np.asarray(log_c, dtype=float)
    J = log_c.size - 5
    if J < 0:
        raise ValueError("need at least five log c values")
    lmu = log_c[:-1] - log_c[1:]
    mu = np.exp(lmu)
    d1 = lmu[1:] - lmu[:-1]
    sigma = np.expm1(d1)
    d2 = lmu[2:] - lmu[:-2]
    d3 = lmu[3:] - lmu[:-3]
    # E X^k - 1 for X = Gamma_j / mu_j, k = 2, 3, 4
    q2 = np.expm1(d1[: J + 1])
    q3 = np.expm1(d1[: J + 1] + d2[: J + 1])
    q4 = np.expm1(d1[: J + 1] + d2[: J + 1] + d3[: J + 1])
    nu = q4 - 4.0 * q3 + 6.0 * q2
    return MomentLadder(J=J, log_c=log_c, mu=mu, sigma=sigma, nu=nu, measure_name=measure_name)


def compute_moments(measure, J):
    """Moment ladder up to cutoff J; nu_J needs moments up to E|z|^{2(J+4)}."""
    if J < 1:
        raise ValueError("J must be at least 1")
    log_m = np.array([measure.log_partial_moment(j) for j in range(J + 5)])
    return ladder_from_log_c(log_m[0] - log_m, measure.name)


# -- size-biased variates ----------------------------------------------------------------
@dataclass(frozen=True)
class GammaVariate:
    j: int
    measure: RadialMeasure


def _gp_shape(fam, j):
    return (fam.a + 2.0 + 2.0 * j) / fam.c


def gamma_cdf(v, x):
    """P[Gamma_j <= x]; 0 for x < 0. Vectorized in x and in j (array-valued v.j)."""
    return _gamma_tail(v.measure, v.j, x, upper=False)


def gamma_sf(v, x):
    """P[Gamma_j > x], computed directly (no 1 - cdf cancellation for closed forms)."""
    return _gamma_tail(v.measure, v.j, x, upper=True)


def gamma_cdf_matrix(measure, js, x):
    """CDF values for every (j, x) pair: shape (len(js), len(x))."""
    js = np.asarray(js)[:, None]
    return _gamma_tail(measure, js, np.asarray(x, dtype=float)[None, :], upper=False)


def gamma_sf_matrix(measure, js, x):
    js = np.asarray(js)[:, None]
    return _gamma_tail(measure, js, np.asarray(x, dtype=float)[None, :], upper=True)


def _gamma_tail(measure, j, x, upper):
    x = np.asarray(x, dtype=float)
    j = np.asarray(j)
    fam = measure.family
    if isinstance(fam, GaussianPower):
        xp = np.maximum(x, 0.0)
        u = fam.b * xp ** (0.5 * fam.c)
        s = _gp_shape(fam, j)
        out = special.gammaincc(s, u) if upper else special.gammainc(s, u)
    elif isinstance(fam, DiskUniform):
        ratio = np.clip(x / fam.radius**2, 0.0, 1.0)
        with np.errstate(divide="ignore"):
            cdf = np.exp((j + 1.0) * np.log(ratio))
            out = -np.expm1((j + 1.0) * np.log(ratio)) if upper else cdf
    else:
        out = _tabulated_tail(measure, j, x, upper)
    if upper:
        return np.where(x < 0, 1.0, out)
    return np.where(x < 0, 0.0, out)


def _tabulated_tail(measure, j, x, upper):
    """Exact CDF for a piecewise-linear weight: x^j w(x) is a polynomial of degree
    j+1 on each grid cell, so a Gauss-Legendre rule with (j+3)//2 nodes is exact.
    Values are scaled by x_max^j to stay in range.
    """
    gx = np.asarray(measure.family.x, dtype=float)
    gw = np.asarray(measure.family.w, dtype=float)
    lo, hi = gx[0], gx[-1]
    jb, xb = np.broadcast_arrays(j, x)
    out = np.empty(xb.shape, dtype=float)
    for jj in np.unique(jb):
        jj = int(jj)
        nodes, weights = np.polynomial.legendre.leggauss(max(2, (jj + 3) // 2 + 1))

        def cell_integral(a, b):
            half, mid = 0.5 * (b - a), 0.5 * (b + a)
            t = mid[..., None] + half[..., None] * nodes
            f = (t / hi) ** jj * np.interp(t, gx, gw)
            return half * (f @ weights)

        cum = np.concatenate([[0.0], np.cumsum(cell_integral(gx[:-1], gx[1:]))])
        total = cum[-1]
        sel = jb == jj
        xs = np.clip(xb[sel], lo, hi)
        cell = np.clip(np.searchsorted(gx, xs, side="right") - 1, 0, gx.size - 2)
        below = cum[cell] + cell_integral(gx[cell], xs)
        above = (cum[-1] - cum[cell + 1]) + cell_integral(xs, gx[cell + 1])
        out[sel] = (above if upper else below) / total
    return np.clip(out, 0.0, 1.0)


def sample_gamma(v, rng, size=None):
    """Draw(s) of Gamma_j."""
    fam = v.measure.family
    if isinstance(fam, GaussianPower):
        u = rng.gamma(_gp_shape(fam, v.j), size=size)
        return (u / fam.b) ** (2.0 / fam.c)
    if isinstance(fam, DiskUniform):
        return fam.radius**2 * rng.random(size=size) ** (1.0 / (v.j + 1.0))
    tables = v.measure.tables
    if not tables or v.j not in tables:
        raise TableNotBuilt(f"no inverse-CDF table for j={v.j}; call with_inverse_tables first", j=v.j)
    p, xs = tables[v.j]
    return np.interp(rng.random(size=size), p, xs)


def sample_gamma_ladder(measure, n, rng, size=None):
    """Independent draws of Gamma_0..Gamma_n; shape (size, n+1) or (n+1,)."""
    js = np.arange(n + 1)
    fam = measure.family
    shape = (js.size,) if size is None else (size, js.size)
    if isinstance(fam, GaussianPower):
        u = rng.gamma(np.broadcast_to(_gp_shape(fam, js), shape))
        return (u / fam.b) ** (2.0 / fam.c)
    if isinstance(fam, DiskUniform):
        return fam.radius**2 * rng.random(shape) ** (1.0 / (js + 1.0))
    return np.stack([sample_gamma(GammaVariate(int(j), measure), rng, size=size) for j in js], axis=-1)


# -- classifier ---------------------------------------------------------------------------
NOT_RIGID_NUMBERS = "NotRigidNumbers"
RIGID_NUMBERS = "RigidNumbers"
RIGID_LEVEL1 = "RigidLevel1"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Classification:
    verdict: str
    diagnostics: dict


def _tail_slope(js, values):
    v = np.abs(np.asarray(values, dtype=float))
    ok = v > 0
    if ok.sum() < 3:
        return -np.inf
    return float(np.polyfit(np.log(js[ok]), np.log(v[ok]), 1)[0])


def _plateau(partial):
    """Last-quarter increment below 1e-6 of the running sum."""
    n = partial.size
    q = max(1, n // 4)
    inc = partial[-1] - partial[-1 - q]
    return bool(abs(inc) <= 1e-6 * abs(partial[-1]))


def classify_rigidity(ladder, abs_continuous, J_min=64, margin=0.1, a_max=8, strict=False):
    """Apply the summability hypotheses of the two radial-DPP criteria to a ladder.

    Series convergence is judged from log-log tail exponents fitted on the last half
    of the ladder (summable iff exponent < -1 - margin). Partial sums and plateau
    flags are reported alongside as evidence.
    """
    J = ladder.J
    if J < J_min:
        if strict:
            raise InsufficientLadder(f"ladder length {J} below J_min={J_min}", J=J, J_min=J_min)
        return Classification(INCONCLUSIVE, {"reason": f"J={J} < J_min={J_min}", "J": J})

    js = np.arange(1, J + 1)
    sigma = ladder.sigma[1 : J + 1]
    nu = ladder.nu[1 : J + 1]
    mu = ladder.mu[1 : J + 1]
    tail = js >= max(1, J // 2)

    slope_sigma = _tail_slope(js[tail], sigma[tail])
    slope_nu = _tail_slope(js[tail], nu[tail])
    slope_mu = _tail_slope(js[tail], mu[tail])

    sigma_partial = np.cumsum(sigma)
    nu_partial = np.cumsum(nu)
    # log-domain Sum_{j<=k} mu_j^4 nu_j / mu_k^4
    lmu = ladder.log_mu[1 : J + 1]
    with np.errstate(divide="ignore"):
        lterm = 4.0 * lmu + np.log(np.abs(nu))
    log_cum = np.logaddexp.accumulate(lterm)
    ratio = np.exp(log_cum - 4.0 * lmu)
    slope_ratio = _tail_slope(js[tail], ratio[tail])

    diag = {
        "J": J,
        "sigma_tail_exponent": slope_sigma,
        "nu_tail_exponent": slope_nu,
        "mu_growth_exponent": slope_mu,
        "ratio_tail_exponent": slope_ratio,
        "sigma_partial_sum": float(sigma_partial[-1]),
        "nu_partial_sum": float(nu_partial[-1]),
        "sigma_plateau": _plateau(sigma_partial),
        "nu_plateau": _plateau(nu_partial),
        "ratio_last": float(ratio[-1]),
        "abs_continuous": bool(abs_continuous),
        "min_sigma": float(ladder.sigma.min()),
    }

    if slope_sigma < -1.0 - margin:
        diag["rule"] = "sum sigma_j converges"
        return Classification(NOT_RIGID_NUMBERS, diag)

    nu_ok = slope_nu < -1.0 - margin
    ratio_ok = slope_ratio < -margin
    diag["nu_summable"] = nu_ok
    diag["fourth_moment_predicate"] = ratio_ok
    if not (nu_ok and ratio_ok):
        diag["rule"] = "neither criterion certified"
        return Classification(INCONCLUSIVE, diag)

    a_star = None
    if slope_mu > 0:
        for a in range(1, a_max + 1):
            if a * slope_mu > 1.0 + margin:
                a_star = a
                break
    diag["smallest_a"] = a_star
    if abs_continuous and a_star is not None:
        diag["rule"] = "rigidity of numbers plus inverse-power summability"
        return Classification(RIGID_LEVEL1, diag)
    diag["rule"] = "sum nu_j converges and fourth-moment predicate holds"
    return Classification(RIGID_NUMBERS, diag)
