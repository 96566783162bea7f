"""Model nonlinearity g, its primitive G, flux maps and structure-condition checks.

Two families are supported:

* ``power``:      g(t) = t^(p-1), p > 2
* ``power-log``:  g(t) = t^(p-1) * ln(a + t)^alpha_log, a > 1, alpha_log > 0

Both satisfy the two structure conditions the solver relies on: bounded
ratio t*g'(t)/g(t) in [g0, g1] and a p-monotonicity inequality for the flux
xi -> g(|xi|)/|xi| * xi.  The bounds are *claimed* on the model object and
checked numerically by :func:`validate_ellipticity` /
:func:`estimate_monotonicity_constant`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class Nonlinearity:
    """Parameters of the model nonlinearity together with claimed constants.

    g0, g1 bound t*g'(t)/g(t); c_mono is the claimed constant of the
    p-monotonicity inequality (estimated, never proven).
    """

    kind: str
    p: float
    g0: float
    g1: float
    a: float | None = None
    alpha_log: float | None = None
    c_mono: float | None = None

    def __post_init__(self):
        if self.kind not in ("power", "power-log"):
            raise DomainError(f"unknown nonlinearity kind {self.kind!r}")
        if not self.p > 2:
            raise DomainError(f"exponent p must exceed 2, got {self.p}")
        if not (1 <= self.g0 <= self.g1):
            raise DomainError(f"need 1 <= g0 <= g1, got g0={self.g0}, g1={self.g1}")
        if self.kind == "power-log":
            if self.a is None or not self.a > 1:
                raise DomainError("power-log kind needs a > 1")
            if self.alpha_log is None or not self.alpha_log > 0:
                raise DomainError("power-log kind needs alpha_log > 0")
        if self.c_mono is not None and not self.c_mono > 0:
            raise DomainError("claimed monotonicity constant must be positive")


def eval_g(nl: Nonlinearity, t):
    """Evaluate g(t) for t >= 0 (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("g is defined on t >= 0")
    if nl.kind == "power":
        out = t ** (nl.p - 1.0)
    else:
        out = t ** (nl.p - 1.0) * np.log(nl.a + t) ** nl.alpha_log
    return out if out.ndim else float(out)


def eval_g_prime(nl: Nonlinearity, t):
    """Evaluate g'(t) for t > 0 (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("g' is evaluated on t >= 0")
    if nl.kind == "power":
        out = (nl.p - 1.0) * t ** (nl.p - 2.0)
    else:
        lg = np.log(nl.a + t)
        out = (nl.p - 1.0) * t ** (nl.p - 2.0) * lg ** nl.alpha_log \
            + t ** (nl.p - 1.0) * nl.alpha_log * lg ** (nl.alpha_log - 1.0) / (nl.a + t)
    return out if out.ndim else float(out)


def eval_G(nl: Nonlinearity, t):
    """Evaluate the primitive G(t) = integral of g over [0, t].

    Exact t^p/p for the power family; 64-point Gauss-Legendre on [0, t] for
    power-log (integrand is smooth, so the rule is far below the 1e-10
    relative tolerance the contract asks for).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("G is defined on t >= 0")
    if nl.kind == "power":
        out = t ** nl.p / nl.p
    else:
        # map [-1, 1] nodes onto [0, t] for every entry at once
        tt = np.atleast_1d(t)
        s = 0.5 * tt[..., None] * (_GL_NODES + 1.0)
        vals = s ** (nl.p - 1.0) * np.log(nl.a + s) ** nl.alpha_log
        out = 0.5 * tt * (vals @ _GL_WEIGHTS)
        out = out.reshape(t.shape)
    return out if out.ndim else float(out)


def default_ellipticity_grid():
    return np.logspace(-8, 8, 10_000)


def validate_ellipticity(nl: Nonlinearity, t_grid=None):
    """Check g0 <= t g'(t)/g(t) <= g1 on a positive grid.

    Returns a dict with the observed extrema and a pass flag against the
    claimed bounds (1e-9 slack for roundoff).
    """
    grid = default_ellipticity_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise DomainError("ellipticity grid must be finite and strictly positive")
    ratio = grid * eval_g_prime(nl, grid) / eval_g(nl, grid)
    g0_hat = float(np.min(ratio))
    g1_hat = float(np.max(ratio))
    ok = (nl.g0 - 1e-9 <= g0_hat) and (g1_hat <= nl.g1 + 1e-9)
    return {"g0_hat": g0_hat, "g1_hat": g1_hat, "pass": bool(ok)}


def flux(nl: Nonlinearity, xi):
    """Flux map g(|xi|)/|xi| * xi, extended by 0 at xi = 0.

    Accepts a single d-vector or an (..., d) array.
    """
    xi = np.asarray(xi, dtype=float)
    norm = np.atleast_1d(np.linalg.norm(xi, axis=-1))
    factor = np.zeros_like(norm)
    nz = norm > 0
    factor[nz] = np.atleast_1d(eval_g(nl, norm[nz])) / norm[nz]
    return factor.reshape(xi.shape[:-1] + (1,)) * xi


def flux_delta(nl: Nonlinearity, xi, delta: float):
    """Regularized flux g(m)/m * xi with m = sqrt(|xi|^2 + delta^2)."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    xi = np.asarray(xi, dtype=float)
    m = np.sqrt(np.sum(xi * xi, axis=-1) + delta * delta)
    return (eval_g(nl, m) / m)[..., None] * xi


def flux_delta_jacobian(nl: Nonlinearity, xi, delta: float):
    """Exact Jacobian of flux_delta: a*I + b*xi xi^T, symmetric positive definite.

    a = g(m)/m, b = (g'(m) - g(m)/m)/m^2.  SPD since g' > 0 and
    a*m^2 - |xi|^2*g(m)/m = g(m)*delta^2/m > 0.
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    xi = np.asarray(xi, dtype=float)
    d = xi.shape[-1]
    m = np.sqrt(np.sum(xi * xi, axis=-1) + delta * delta)
    gm = eval_g(nl, m)
    a = gm / m
    b = (eval_g_prime(nl, m) - gm / m) / (m * m)
    eye = np.eye(d)
    return a[..., None, None] * eye + b[..., None, None] * (xi[..., :, None] * xi[..., None, :])


def estimate_monotonicity_constant(nl: Nonlinearity, p: float | None = None,
                                   n_samples: int = 100_000, seed: int = 0, d: int = 2):
    """Sampled lower envelope of (flux(xi)-flux(zeta)).(xi-zeta)/|xi-zeta|^p.

    Magnitudes log-uniform in [1e-4, 1e4], directions uniform; returns the
    minimal ratio and its minimizing pair.  A nonpositive estimate rejects
    the model.
    """
    if n_samples < 10_000:
        raise DomainError("need at least 1e4 samples")
    p = nl.p if p is None else p
    rng = np.random.default_rng(seed)

    def sample(n):
        mag = 10.0 ** rng.uniform(-4, 4, size=n)
        ang = rng.uniform(0.0, 2.0 * np.pi, size=n)
        if d == 2:
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        else:
            v = rng.normal(size=(n, d))
            dirs = v / np.linalg.norm(v, axis=-1, keepdims=True)
        return mag[:, None] * dirs

    xi = sample(n_samples)
    zeta = sample(n_samples)
    diff = xi - zeta
    dn = np.linalg.norm(diff, axis=-1)
    keep = dn > 0
    xi, zeta, diff, dn = xi[keep], zeta[keep], diff[keep], dn[keep]
    num = np.sum((flux(nl, xi) - flux(nl, zeta)) * diff, axis=-1)
    ratio = num / dn ** p
    i = int(np.argmin(ratio))
    c_hat = float(ratio[i])
    if c_hat <= 1e-12:
        raise DomainError(f"monotonicity estimate nonpositive ({c_hat:g}): model rejected")
    return {"c_hat": c_hat, "xi": xi[i].copy(), "zeta": zeta[i].copy()}
