"""Simultaneous polynomial root finding (Aberth-Ehrlich) with Newton polishing.

Polynomials are given by ascending coefficients ``b[0] + b[1] w + ... + b[K] w^K``
already scaled so that max |b_k| is of order one.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _eval(b, w):
    """p(w), p'(w) and sum |b_k||w|^k, evaluated stably inside and outside the unit disk."""
    K = b.size - 1
    aw = abs(w)
    if aw <= 1.0:
        p = b[K]
        dp = 0j
        scale = abs(b[K])
        for k in range(K - 1, -1, -1):
            dp = dp * w + p
            p = p * w + b[k]
            scale = scale * aw + abs(b[k])
        return p, dp, scale
    # reversed polynomial in v = 1/w: p(w) = w^K q(v)
    v = 1.0 / w
    av = 1.0 / aw
    q = b[0]
    dq = 0j
    scale = abs(b[0])
    for k in range(1, K + 1):
        dq = dq * v + q
        q = q * v + b[k]
        scale = scale * av + abs(b[k])
    # p'/p = K/w - v^2 q'(v)/(q(v) w^0) ; return quantities relative to w^K
    # so that p/p' and the residual ratio are scale free
    dp_rel = K * q * v - dq * v * v
    return q, dp_rel, scale


@njit(cache=True, nogil=True)
def _newton_ratio(b, w):
    p, dp, scale = _eval(b, w)
    if dp == 0:
        return 0j, abs(p) / scale, False
    return p / dp, abs(p) / scale, True


@njit(cache=True, nogil=True)
def _polygon_start(b):
    """Initial guesses from the upper convex hull of (k, log|b_k|).

    Each hull edge from k_i to k_j carries j - i roots of modulus
    (|b_i|/|b_j|)^(1/(j-i)); they are spread on that circle with a small
    offset between edges.
    """
    K = b.size - 1
    lb = np.empty(K + 1)
    for k in range(K + 1):
        a = abs(b[k])
        lb[k] = np.log(a) if a > 0 else -1e300
    hull = np.empty(K + 1, dtype=np.int64)
    h = 0
    for k in range(K + 1):
        if lb[k] <= -1e299 and k != 0 and k != K:
            continue
        while h >= 2:
            i, j = hull[h - 2], hull[h - 1]
            # drop j if it lies on or below the segment i -> k
            if (lb[j] - lb[i]) * (k - i) <= (lb[k] - lb[i]) * (j - i):
                h -= 1
            else:
                break
        hull[h] = k
        h += 1
    roots = np.empty(K, dtype=np.complex128)
    pos = 0
    for e in range(h - 1):
        i, j = hull[e], hull[e + 1]
        n = j - i
        rad = np.exp((lb[i] - lb[j]) / n)
        for q in range(n):
            ang = 2.0 * np.pi * q / n + 2.0 * np.pi * e / K + 0.4
            roots[pos] = rad * (np.cos(ang) + 1j * np.sin(ang))
            pos += 1
    return roots


@njit(cache=True, nogil=True)
def aberth(b, max_iter=200, tol=1e-14, polish=3):
    """Roots of the polynomial with complex ascending coefficients ``b``.

    Returns (roots, residuals, iterations, converged). Residuals are
    |p(w)| / sum |b_k||w|^k.
    """
    K = b.size - 1
    roots = np.empty(K, dtype=np.complex128)
    res = np.empty(K)
    if K == 0:
        return roots, res, 0, True
    roots[:] = _polygon_start(b)
    done = np.zeros(K, dtype=np.bool_)
    it = 0
    while it < max_iter:
        it += 1
        n_done = 0
        for i in range(K):
            if done[i]:
                n_done += 1
                continue
            ratio, r_i, ok = _newton_ratio(b, roots[i])
            if not ok:
                roots[i] += 1e-8 * (1 + abs(roots[i]))
                continue
            s = 0j
            for m in range(K):
                if m != i:
                    d = roots[i] - roots[m]
                    if d != 0:
                        s += 1.0 / d
            corr = ratio / (1.0 - ratio * s)
            roots[i] -= corr
            if abs(corr) <= tol * max(1.0, abs(roots[i])) or r_i < 1e-16:
                done[i] = True
        if n_done == K:
            break
    converged = True
    for i in range(K):
        if not done[i]:
            converged = False
    for i in range(K):
        for _ in range(polish):
            ratio, r_i, ok = _newton_ratio(b, roots[i])
            if not ok:
                break
            nxt = roots[i] - ratio
            _, r_n, _ = _newton_ratio(b, nxt)
            if r_n <= r_i:
                roots[i] = nxt
            else:
                break
        _, res[i], _ = _newton_ratio(b, roots[i])
    return roots, res, it, converged


def polynomial_roots(coeffs, max_iter=200):
    """Convenience wrapper for ascending complex coefficients; trailing zeros are dropped."""
    b = np.asarray(coeffs, dtype=np.complex128)
    nz = np.nonzero(b)[0]
    if nz.size == 0:
        raise ValueError("zero polynomial")
    b = b[: nz[-1] + 1]
    lead_zero = nz[0]
    roots, res, it, ok = aberth(np.ascontiguousarray(b[lead_zero:] / np.max(np.abs(b))), max_iter)
    if lead_zero:
        roots = np.concatenate([np.zeros(lead_zero, complex), roots])
        res = np.concatenate([np.zeros(lead_zero), res])
    return roots, res, it, ok
