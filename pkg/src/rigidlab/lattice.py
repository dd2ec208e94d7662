"""One-dimensional Gaussian perturbed lattice {k + s_k Z_k}, s_k = |k|^beta."""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import BadParams, QuadratureFailure
from .points import PointConfiguration

INSERTION_TOLERANT = "InsertionTolerant"
RIGID_LEVEL1 = "RigidLevel1"

# Gaussian mass beyond 9 sd is ~2e-19, far below the 1e-12 tail target.
_SD_SPAN = 9


@dataclass(frozen=True)
class PerturbedLatticeModel:
    beta: float
    M: int
    symmetric: bool = True

    def __post_init__(self):
        if self.beta < 0:
            raise BadParams("beta must be nonnegative", beta=self.beta)
        if self.M < 1:
            raise BadParams("index range needs M >= 1", M=self.M)

    @property
    def indices(self):
        if self.symmetric:
            return np.arange(-self.M, self.M + 1)
        return np.arange(1, self.M + 1)

    def sd_at(self, k):
        """Perturbation standard deviation; the origin gets sd 1 instead of 0."""
        k = np.abs(np.asarray(k, dtype=float))
        return np.where(k == 0, 1.0, k**self.beta)


def sample(model, rng, seed=0):
    k = model.indices
    x = k + model.sd_at(k) * rng.standard_normal(k.size)
    return PointConfiguration(x, np.inf, f"lattice(beta={model.beta})", seed)


# ---- insertion-tolerance side -------------------------------------------

def log_gaussian_affinity(mu1, s1, mu2, s2):
    """log of the Hellinger affinity integral sqrt(f g) of two normal densities."""
    s1, s2 = np.asarray(s1, float), np.asarray(s2, float)
    ss = s1 * s1 + s2 * s2
    return 0.5 * np.log1p(-((s1 - s2) ** 2) / ss) - (np.asarray(mu1) - mu2) ** 2 / (4.0 * ss)


def log_hellinger_affinity(k, beta):
    """log affinity between N(k, k^{2 beta}) and N(k+1, (k+1)^{2 beta}), k >= 1."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 1):
        raise BadParams("affinity index must be >= 1")
    s1 = k**beta
    # s1 - s2 without cancellation for large k
    ds = -s1 * np.expm1(beta * np.log1p(1.0 / k))
    s2 = s1 - ds
    ss = s1 * s1 + s2 * s2
    return 0.5 * np.log1p(-ds * ds / ss) - 1.0 / (4.0 * ss)


def hellinger_affinity(k, beta):
    return np.exp(log_hellinger_affinity(k, beta))


def kakutani_product(beta, K_max):
    """Partial products over k = 1..K for K = 0..K_max (entry 0 is the empty product)."""
    if K_max < 1:
        raise BadParams("K_max must be >= 1", K_max=K_max)
    logs = log_hellinger_affinity(np.arange(1, K_max + 1), beta)
    return np.exp(np.concatenate([[0.0], np.cumsum(logs)]))


# ---- rigidity side --------------------------------------------------------

def _breaks_of(h):
    bp = np.asarray(getattr(h, "breakpoints", ()), dtype=float)
    bp = bp[(bp > 0) & (bp < 1)]
    return np.concatenate([-bp, bp])


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _moments_block(h, ks, s, L, kinks):
    """E[h(X/L)], E[h^2], E[1-h], E[(1-h)^2] for X ~ N(k, s^2), one row per index.

    Integrates over the standardized variable y in [-9, 9] on unit pieces,
    split further where h has a kink, so every piece sees a smooth integrand.
    """
    unit = np.arange(-_SD_SPAN, _SD_SPAN + 1, dtype=float)
    marks = np.concatenate([[-L, L], L * kinks])
    cuts = np.clip((marks[None, :] - ks[:, None]) / s[:, None], -_SD_SPAN, _SD_SPAN)
    edges = np.sort(np.concatenate([np.broadcast_to(unit, (ks.size, unit.size)), cuts], axis=1), axis=1)
    a, b = edges[:, :-1], edges[:, 1:]
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    y = mid[:, :, None] + half[:, :, None] * _GL_X
    w = half[:, :, None] * _GL_W * np.exp(-0.5 * y * y) / np.sqrt(2 * np.pi)
    x = ks[:, None, None] + s[:, None, None] * y
    hv = np.real(h(x / L))
    g = 1.0 - hv
    sums = lambda f: np.sum(w * f, axis=(1, 2))
    return sums(hv), sums(hv * hv), sums(g), sums(g * g)


def variance_terms(model, h, L, tail_tol=1e-12):
    """Per-index variances Var(h(X_k / L)) and the indices used.

    The index range starts at ``max(M, 20 L)`` and grows until the probability
    that any omitted point reaches [-L, L] is below ``tail_tol``. ``h`` is any
    vectorized function supported on [-1, 1] with values in [0, 1].
    """
    if model.beta >= 1:
        # sum_k P(X_k in [-L, L]) ~ sum L / k^beta diverges: infinitely many points per window
        raise BadParams("the lattice is not locally finite for beta >= 1", beta=model.beta)
    L = float(L)
    M = max(model.M, int(np.ceil(20 * L)))

    def reach(ks):
        s = model.sd_at(ks)
        return ndtr((L - ks) / s) - ndtr((-L - ks) / s)

    while True:
        ahead = np.arange(M + 1, 2 * M + 1)
        tail = reach(ahead).sum() * (2 if model.symmetric else 1)
        if tail < tail_tol:
            break
        M *= 2
    ks = np.arange(-M, M + 1) if model.symmetric else np.arange(1, M + 1)
    kinks = _breaks_of(h)
    var = np.empty(ks.size)
    for lo in range(0, ks.size, 2048):
        kb = ks[lo:lo + 2048].astype(float)
        e1, e2, g1, g2 = _moments_block(h, kb, model.sd_at(kb), L, kinks)
        var[lo:lo + 2048] = np.where(g1 < e1, g2 - g1 * g1, e2 - e1 * e1)
    if np.any(var < -1e-13) or not np.all(np.isfinite(var)):
        raise QuadratureFailure("negative or non-finite per-index variance", L=L)
    return ks, np.maximum(var, 0.0)


def variance_linear_statistic(model, h, L):
    """Var(sum_k h(X_k / L)), summed exactly over independent indices."""
    _, var = variance_terms(model, h, L)
    return float(np.sum(var))


def lipschitz_bound(model, h, L, k_cut):
    """kappa^2 L^-2 sum_{|k| <= k_cut} s_k^2, the Lipschitz bound on the near-window part."""
    ks = np.arange(-k_cut, k_cut + 1) if model.symmetric else np.arange(1, k_cut + 1)
    kappa = h.lipschitz_constant
    return float(kappa**2 / L**2 * np.sum(model.sd_at(ks) ** 2))


def loglog_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@dataclass(frozen=True)
class LatticeClassification:
    verdict: str
    kakutani_limit: float
    variance_slope: float


def classify_lattice(beta, K_max=10**6, Ls=(8, 16, 32, 64, 128), bump_eps=0.5):
    """Phase classification at beta = 1/2 with numerical evidence.

    The evidence is the Kakutani partial product at ``K_max`` (positive limit
    means the shifted law stays equivalent) and the log-log slope of the
    linear-statistic variance in L (nan when beta >= 1, where it is undefined).
    """
    if beta < 0:
        raise BadParams("beta must be nonnegative", beta=beta)
    from .testfunctions import build_test_function

    verdict = INSERTION_TOLERANT if beta > 0.5 else RIGID_LEVEL1
    limit = float(kakutani_product(beta, K_max)[-1])
    slope = float("nan")
    if beta < 1:
        h = build_test_function("LatticeBump", eps=bump_eps)
        model = PerturbedLatticeModel(beta, 1)
        slope = loglog_slope(Ls, [variance_linear_statistic(model, h, L) for L in Ls])
    return LatticeClassification(verdict, limit, slope)
