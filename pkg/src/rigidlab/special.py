"""Small numerical kernels: real dilogarithm and composite Gauss-Legendre rules."""

import numpy as np

PI2_6 = np.pi**2 / 6.0

# Li2 series on [0, 1/2] converges like 2^-j; 52 terms reach double precision.
_DILOG_TERMS = 52
_DILOG_J = np.arange(1, _DILOG_TERMS + 1, dtype=float)


def _dilog_series(x):
    # Horner on sum_j x^j / j^2, x in [0, 1/2]
    acc = np.zeros_like(x)
    for j in _DILOG_J[::-1]:
        acc = x * (1.0 / (j * j) + acc)
    return acc


def dilog(x):
    """Real dilogarithm Li2(x) = sum_{j>=1} x^j / j^2 for x in [0, 1].

    Uses the power series for x <= 1/2 and the reflection
    Li2(x) = pi^2/6 - log(x) log(1-x) - Li2(1-x) above it.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("dilog is implemented on [0, 1]")
    out = np.empty_like(x)
    lo = x <= 0.5
    out[lo] = _dilog_series(x[lo])
    hi = ~lo
    xh = x[hi]
    y = 1.0 - xh
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(y > 0, np.log(xh) * np.log1p(-xh), 0.0)
    out[hi] = PI2_6 - cross - _dilog_series(y)
    return out if out.ndim else float(out)


def gauss_legendre(a, b, order=16, panels=1):
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def piecewise_gauss_legendre(breaks, order=16, panels=8):
    """Concatenate composite rules over consecutive intervals of ``breaks``."""
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            n, w = gauss_legendre(a, b, order, panels)
            nodes.append(n)
            weights.append(w)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def pairwise_mean_se(values):
    """Mean and standard error with numpy's pairwise summation (order-independent up to rounding)."""
    v = np.asarray(values)
    n = v.shape[0]
    mean = v.mean(axis=0)
    if n < 2:
        return mean, np.full_like(np.asarray(mean, dtype=float), np.nan)
    return mean, v.std(axis=0, ddof=1) / np.sqrt(n)
