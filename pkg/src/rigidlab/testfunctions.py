"""Radial cutoff profiles used as test functions for linear statistics.

Four families share one evaluator interface:

* ``MollifiedLog(r0, eps)``: equal to 1 on ``r < 2 r0``, then a C^2 descent to 0
  whose slope in ``u = log r`` is a smoothed box of height ``eps/4``. Both
  ``r |phi'|`` and ``r^2 |phi''|`` stay below ``eps/2``.
* ``PiecewiseLog(r0, eps)``: 1 up to ``r0``, then ``1 - eps log(r/r0)`` until it
  reaches 0 at ``r0 e^{1/eps}``. Harmonic between the two break radii.
* ``MomentWeighted(k, r0, eps)``: ``z^k`` times the MollifiedLog profile.
* ``LatticeBump(eps)``: PiecewiseLog on the real line with outer radius 1,
  evaluated at ``|x|``.

Scaling by ``L`` stretches the radial profile only; the ``z^k`` factor of the
moment family is left untouched, so the scaled function is exactly ``z^k`` on
the inner disk of radius ``2 r0 L``.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import BadParams

MOLLIFIED = "MollifiedLog"
PIECEWISE = "PiecewiseLog"
MOMENT = "MomentWeighted"
LATTICE = "LatticeBump"
KINDS = (MOLLIFIED, PIECEWISE, MOMENT, LATTICE)

# Ramp width (in log r) of the smoothstep that rounds the corners of the log slope.
RAMP_WIDTH = 1.5


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _smoothstep_d(x):
    inside = (x > 0.0) & (x < 1.0)
    return np.where(inside, 6.0 * x * (1.0 - x), 0.0)


def _smoothstep_int(x):
    # integral of the smoothstep from -inf to x
    xc = np.clip(x, 0.0, 1.0)
    return xc**3 - 0.5 * xc**4 + np.maximum(x - 1.0, 0.0)


@dataclass(frozen=True)
class RadialTestFunction:
    kind: str
    r0: float
    eps: float
    k: int = 0
    scale: float = 1.0

    # ---- geometry -------------------------------------------------------
    @property
    def _box(self):
        # width in log r of the unsmoothed log-slope region
        return 4.0 / self.eps

    @property
    def inner_radius(self):
        """Radius below which the profile equals 1."""
        if self.kind in (MOLLIFIED, MOMENT):
            return 2.0 * self.r0 * self.scale
        return self.r0 * self.scale

    @property
    def outer_radius(self):
        """Radius beyond which the profile vanishes."""
        if self.kind in (MOLLIFIED, MOMENT):
            return self.inner_radius * np.exp(self._box + RAMP_WIDTH)
        return self.inner_radius * np.exp(1.0 / self.eps)

    @property
    def breakpoints(self):
        """Radii where the profile or one of its derivatives changes formula."""
        if self.kind in (MOLLIFIED, MOMENT):
            logs = sorted({0.0, RAMP_WIDTH, self._box, self._box + RAMP_WIDTH})
            return self.inner_radius * np.exp(np.array(logs))
        return np.array([self.inner_radius, self.outer_radius])

    @property
    def lipschitz_constant(self):
        """sup |d profile / dr| at the current scale."""
        if self.kind in (MOLLIFIED, MOMENT):
            return self.eps / (4.0 * self.inner_radius)
        return self.eps / self.inner_radius

    @property
    def laplacian_constant(self):
        """C with |Laplacian| <= C * eps * r^(k-2) on the transition annulus (unit scale)."""
        if self.kind in (MOLLIFIED, MOMENT):
            return (1.0 + 2.0 * self.k) / 4.0
        return 2.0 * self.k

    def scaled(self, L):
        return replace(self, scale=self.scale * float(L))

    # ---- radial profile and its r-derivatives --------------------------
    def _log_derivs(self, r):
        """Profile value and its first two derivatives in u = log(r / inner_radius)."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            v = np.log(r / self.inner_radius)
        if self.kind in (MOLLIFIED, MOMENT):
            d, a, q = RAMP_WIDTH, self._box, self.eps / 4.0
            x1, x2 = v / d, (v - a) / d
            val = 1.0 - q * d * (_smoothstep_int(x1) - _smoothstep_int(x2))
            du = -q * (_smoothstep(x1) - _smoothstep(x2))
            duu = -(q / d) * (_smoothstep_d(x1) - _smoothstep_d(x2))
            val = np.where(v >= a + d, 0.0, np.where(v <= 0.0, 1.0, np.clip(val, 0.0, 1.0)))
            return val, du, duu
        width = 1.0 / self.eps
        inside = (v > 0.0) & (v < width)
        val = np.where(v <= 0.0, 1.0, np.where(inside, 1.0 - self.eps * v, 0.0))
        du = np.where(inside, -self.eps, 0.0)
        return val, du, np.zeros_like(du)

    def profile(self, r):
        return self._log_derivs(np.abs(r))[0]

    def profile_d1(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        _, du, _ = self._log_derivs(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r > 0, du / r, 0.0)

    def profile_d2(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        _, du, duu = self._log_derivs(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r > 0, (duu - du) / (r * r), 0.0)

    # ---- the test function itself --------------------------------------
    def value(self, z):
        """Function value at points of the plane (or the line for LatticeBump)."""
        z = np.asarray(z)
        base = self.profile(np.abs(z))
        if self.kind == MOMENT and self.k:
            return z.astype(complex) ** self.k * base
        return base

    __call__ = value

    def gradient_magnitude(self, r):
        """|d/dr (r^k profile(r))|, the radial gradient of |value|."""
        r = np.abs(np.asarray(r, dtype=float))
        k = self.k if self.kind == MOMENT else 0
        if k == 0:
            return np.abs(self.profile_d1(r))
        return np.abs(k * r ** (k - 1) * self.profile(r) + r**k * self.profile_d1(r))

    def laplacian(self, r):
        """Radial part of the Laplacian.

        For the moment family the full Laplacian at z = r e^{i t} is
        ``e^{i k t}`` times this value. For LatticeBump it is the 1-D second
        derivative.
        """
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind == LATTICE:
            return self.profile_d2(r)
        _, du, duu = self._log_derivs(r)
        k = self.k if self.kind == MOMENT else 0
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(r > 0, (duu + 2.0 * k * du) * r ** (k - 2.0), 0.0)
        return out


def build_test_function(kind, params=None, **kw):
    """Validate parameters and return a unit-scale RadialTestFunction.

    ``params`` may be a mapping with keys among r0, eps (or epsilon), k, scale.
    """
    p = dict(params or {})
    p.update(kw)
    if "epsilon" in p:
        p["eps"] = p.pop("epsilon")
    if kind not in KINDS:
        raise BadParams(f"unknown test function kind {kind!r}", kind=kind)
    eps = float(p.get("eps", 1.0))
    if not np.isfinite(eps) or eps <= 0:
        raise BadParams("eps must be positive", eps=eps)
    k = int(p.get("k", 0))
    if kind == LATTICE:
        r0 = float(np.exp(-1.0 / eps))
    else:
        r0 = float(p.get("r0", 1.0))
        if not np.isfinite(r0) or r0 <= 0:
            raise BadParams("r0 must be positive", r0=r0)
    if kind == MOMENT and k < 0:
        raise BadParams("moment order must be nonnegative", k=k)
    if kind != MOMENT:
        k = 0
    scale = float(p.get("scale", 1.0))
    if scale <= 0:
        raise BadParams("scale must be positive", scale=scale)
    return RadialTestFunction(kind=kind, r0=r0, eps=eps, k=k, scale=scale)
