"""Closed-form radial solution for constant interface data on concentric circles.

For g(t) = t^(p-1), constant datum f > 0 on the circle of radius rho inside
the ball of radius R (any dimension d >= 2, p != d), the solution is radial:
constant on the inner region and

    u(r) = A * (r^kappa - R^kappa),   kappa = (p - d)/(p - 1),

on the annulus, with A fixed by the flux jump |u'(rho+)| = f^(1/(p-1)).
The inner gradient vanishes, so the gradient jumps across the interface by
exactly f^(1/(p-1)) in magnitude: bounded but discontinuous.

``shoot_radial`` recomputes the profile independently from the conserved
quantity r^(d-1) g(|u'|) = const via scalar root solves and quadrature, and
is the cross-check the closed form must pass before it is trusted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, SolverError

_GL5_NODES, _GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class RadialSolution:
    d: int
    p: float
    rho: float
    R: float
    f_const: float
    kappa: float
    A: float
    u_inner: float

    def u(self, r):
        """Evaluate u at radius r (scalar or array)."""
        r = np.asarray(r, dtype=float)
        outer = self.A * (r ** self.kappa - self.R ** self.kappa)
        out = np.where(r <= self.rho, self.u_inner, outer)
        return out if out.ndim else float(out)

    def du(self, r):
        """Radial derivative u'(r); zero on the inner region."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            outer = self.A * self.kappa * r ** (self.kappa - 1.0)
        out = np.where(r <= self.rho, 0.0, outer)
        return out if out.ndim else float(out)

    def field(self, x, y):
        """Evaluate u at cartesian points (for mesh interpolation)."""
        return self.u(np.hypot(x, y))


def radial_solution(d: int, p: float, rho: float, R: float, f_const: float) -> RadialSolution:
    """Closed-form radial solution of the transmission problem.

    Sign convention: the interface normal points into the inner region, and
    the weak form pairs the load positively, so u > 0 inside and decreases
    to zero at the outer boundary.
    """
    if d < 2:
        raise DomainError("dimension must be >= 2")
    if not p > 2:
        raise DomainError("exponent p must exceed 2")
    if p == d:
        raise DomainError("p = d (logarithmic branch) is unsupported")
    if not (0 < rho < R):
        raise DomainError("need 0 < rho < R")
    if not f_const > 0:
        raise DomainError("constant datum must be positive")
    kappa = (p - d) / (p - 1.0)
    slope = f_const ** (1.0 / (p - 1.0))  # |u'(rho+)|
    A = -slope * rho ** (1.0 - kappa) / kappa
    u_inner = A * (rho ** kappa - R ** kappa)
    return RadialSolution(d=d, p=p, rho=rho, R=R, f_const=f_const,
                          kappa=kappa, A=A, u_inner=u_inner)


def shoot_radial(d: int, p: float, rho: float, R: float, f_const: float,
                 n_grid: int = 1000):
    """Independent radial profile from the conserved first-order form.

    On the annulus r^(d-1) g(|u'|) is constant; the flux jump pins the
    constant to rho^(d-1) * f.  |u'(r)| is recovered per point by a bracketed
    root solve on x -> r^(d-1) x^(p-1) - const, and u by 5-point Gauss
    quadrature of |u'| from the outer boundary inward.

    Returns (r, u, du) arrays on a uniform grid of [rho, R].
    """
    if n_grid < 1000:
        raise DomainError("need n_grid >= 1e3")
    if not (0 < rho < R) or not p > 2 or not f_const > 0:
        raise DomainError("invalid radial parameters")
    const = rho ** (d - 1) * f_const

    def speed(r):
        # solve r^(d-1) * x^(p-1) = const for x > 0
        target = const / r ** (d - 1)

        def fun(x):
            return x ** (p - 1.0) - target

        hi = max(1.0, 2.0 * target)
        tries = 0
        while fun(hi) < 0:
            hi *= 2.0
            tries += 1
            if tries > 200:
                raise SolverError("root bracket expansion failed")
        return brentq(fun, 0.0, hi, xtol=1e-15, rtol=1e-15)

    r = np.linspace(rho, R, n_grid)
    du_mag = np.array([speed(ri) for ri in r])

    # u(r) = int_r^R |u'(s)| ds, accumulated interval by interval from R
    seg = np.zeros(n_grid - 1)
    for i in range(n_grid - 1):
        a, b = r[i], r[i + 1]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        seg[i] = half * sum(w * speed(mid + half * x)
                            for x, w in zip(_GL5_NODES, _GL5_WEIGHTS))
    u = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    return r, u, -du_mag
