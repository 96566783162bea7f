"""Regularity functionals measured on discrete solutions.

Everything operates on ball patches (barycenter membership, see the mesh
module), so every quantity is a discrete proxy with an h-dependent error;
the test suite carries the explicit tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, MeshError
from .fem import DiscreteField, InterfaceData, gradient_field
from .mesh import Mesh, ball_patch


@dataclass
class RegularityReport:
    centers: np.ndarray          # (nc, 2)
    radii: np.ndarray            # (nr,), strictly decreasing
    bmo_values: np.ndarray       # (nc, nr)
    osc_values: np.ndarray       # (nc, nr)
    alpha_hat: float = float("nan")
    alpha_hat_exploratory: bool = True
    loglip_C: float = float("nan")
    lb_ratios: list = field(default_factory=list)
    provenance: str = ""

    def to_dict(self):
        return {
            "centers": self.centers.tolist(),
            "radii": self.radii.tolist(),
            "bmo_values": self.bmo_values.tolist(),
            "osc_values": self.osc_values.tolist(),
            "alpha_hat": self.alpha_hat,
            "alpha_hat_exploratory": self.alpha_hat_exploratory,
            "loglip_C": self.loglip_C,
            "lb_ratios": self.lb_ratios,
            "config_hash": self.provenance,
        }


def _patch_and_grads(mesh, u, x0, r, min_scale=True):
    if min_scale and r < 4 * mesh.h:
        raise DomainError(f"radius {r} below resolvable scale 4h = {4 * mesh.h}")
    patch = ball_patch(mesh, x0, r)
    return patch


def mean_oscillation_gradient(mesh: Mesh, u: DiscreteField, x0, r: float):
    """r^-d * integral over B_r(x0) of |Du - mean gradient|, d = 2."""
    patch = _patch_and_grads(mesh, u, x0, r)
    if patch.size == 0:
        return 0.0
    Du = gradient_field(mesh, u)[patch]
    areas = mesh.areas[patch]
    mean = (areas[:, None] * Du).sum(axis=0) / areas.sum()
    dev = np.linalg.norm(Du - mean, axis=1)
    return float(np.dot(areas, dev) / r ** 2)


def bmo_profile(mesh: Mesh, u: DiscreteField, centers, radii) -> RegularityReport:
    """Table of mean gradient oscillations over centers x dyadic radii."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) >= 0):
        raise DomainError("radii must be strictly decreasing")
    vals = np.empty((centers.shape[0], radii.size))
    for i, c in enumerate(centers):
        for j, r in enumerate(radii):
            vals[i, j] = mean_oscillation_gradient(mesh, u, c, r)
    return RegularityReport(centers=centers, radii=radii, bmo_values=vals,
                            osc_values=np.zeros_like(vals))


def oscillation_modulus(mesh: Mesh, u: DiscreteField, centers, radii):
    """osc(center, r) = max - min of vertex values over the ball patch."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.asarray(radii, dtype=float)
    osc = np.empty((centers.shape[0], radii.size))
    for i, c in enumerate(centers):
        for j, r in enumerate(radii):
            patch = _patch_and_grads(mesh, u, c, r)
            if patch.size == 0:
                osc[i, j] = 0.0
                continue
            vals = u.coeffs[np.unique(mesh.triangles[patch])]
            osc[i, j] = float(vals.max() - vals.min())
    return osc


def fit_log_lip(osc_table, radii):
    """Largest osc / (r * (1 + |log r|)) over the whole table."""
    radii = np.asarray(radii, dtype=float)
    mod = radii * (1.0 + np.abs(np.log(radii)))
    return float(np.max(np.asarray(osc_table) / mod[None, :]))


def holder_exponent(osc_table, radii):
    """Pooled least-squares slope of log osc against log r."""
    radii = np.asarray(radii, dtype=float)
    osc = np.asarray(osc_table, dtype=float)
    logs_r = []
    logs_o = []
    for row in osc:
        mask = row > 0
        logs_r.append(np.log(radii[mask]))
        logs_o.append(np.log(row[mask]))
    x = np.concatenate(logs_r)
    y = np.concatenate(logs_o)
    if x.size < 2 or np.ptp(x) == 0.0:
        raise DomainError("exponent fit needs positive oscillations "
                          "at two or more distinct radii")
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)


def exponent_formula(d: int, p: float, eps: float) -> float:
    """Closed-form Hoelder exponent 1 - d/(p + eps*(p-1)).

    Requires 2 < p < d and eps strictly inside
    ((d-p)/(p-1), d - p/(p-1)).
    """
    if not (2 < p < d):
        raise DomainError(f"need 2 < p < d, got p={p}, d={d}")
    lo = (d - p) / (p - 1.0)
    hi = d - p / (p - 1.0)
    if not (lo < eps < hi):
        raise DomainError(f"eps={eps} outside the admissible interval ({lo:g}, {hi:g})")
    return 1.0 - d / (p + eps * (p - 1.0))


def local_boundedness_ratio(mesh: Mesh, u: DiscreteField, f: InterfaceData,
                            x0, R: float):
    """Sup-norm and gradient ratios of the Moser-type estimate over B_R(x0).

    r_sup  = ||u||_Linf(B_{R/2}) / [R^(-d/p) (||u||_Lp(B_R) + R^(d/p+1) ||f||_inf)]
    r_grad = ||Du||_Lp(B_{R/2}) / [R^(-1)    (||u||_Lp(B_R) + R^(d/p+1) ||f||_inf)]
    """
    if not f.bounded:
        raise DomainError("local boundedness ratios need bounded interface data")
    p = f.p if f.p is not None else 3.0
    d = 2
    patch_R = ball_patch(mesh, x0, R)
    patch_half = ball_patch(mesh, x0, R / 2)
    if patch_R.size == 0:
        return {"r_sup": 0.0, "r_grad": 0.0}
    areas = mesh.areas[patch_R]
    # vertex-average quadrature of |u|^p per triangle
    uv = np.abs(u.coeffs[mesh.triangles[patch_R]]) ** p
    lp_u = float(np.dot(areas, uv.mean(axis=1))) ** (1.0 / p)
    fnorm = f.sup_norm
    denom = lp_u + R ** (d / p + 1.0) * fnorm
    if denom == 0.0:
        return {"r_sup": 0.0, "r_grad": 0.0}
    sup_u = float(np.abs(u.coeffs[np.unique(mesh.triangles[patch_half])]).max()) \
        if patch_half.size else 0.0
    Du = gradient_field(mesh, u)[patch_half]
    lp_du = float(np.dot(mesh.areas[patch_half],
                         np.linalg.norm(Du, axis=1) ** p)) ** (1.0 / p) \
        if patch_half.size else 0.0
    r_sup = sup_u / (R ** (-d / p) * denom)
    r_grad = lp_du / (R ** (-1.0) * denom)
    return {"r_sup": float(r_sup), "r_grad": float(r_grad)}


def _patch_field_stats(mesh, values, patch):
    areas = mesh.areas[patch]
    v = values[patch]
    mean = (areas[:, None] * v).sum(axis=0) / areas.sum()
    return areas, v, mean


def campanato_seminorm(mesh: Mesh, field_values, p: float, lam: float,
                       centers, radii):
    """sup over (center, rho) of rho^-lam * integral |v - mean_patch(v)|^p.

    field_values is a per-triangle vector field, shape (m, k).
    """
    if p < 1 or lam < 0:
        raise DomainError("need p >= 1 and lambda >= 0")
    field_values = np.asarray(field_values, dtype=float)
    best = 0.0
    for c in np.atleast_2d(np.asarray(centers, dtype=float)):
        for r in np.asarray(radii, dtype=float):
            patch = ball_patch(mesh, c, r)
            if patch.size == 0:
                continue
            areas, v, mean = _patch_field_stats(mesh, field_values, patch)
            integ = float(np.dot(areas, np.linalg.norm(v - mean, axis=1) ** p))
            best = max(best, integ / r ** lam)
    return best


def morrey_norm(mesh: Mesh, field_values, p: float, lam: float, centers, radii):
    """sup over (center, rho) of rho^-lam * integral |v|^p."""
    if p < 1 or lam < 0:
        raise DomainError("need p >= 1 and lambda >= 0")
    field_values = np.asarray(field_values, dtype=float)
    best = 0.0
    for c in np.atleast_2d(np.asarray(centers, dtype=float)):
        for r in np.asarray(radii, dtype=float):
            patch = ball_patch(mesh, c, r)
            if patch.size == 0:
                continue
            integ = float(np.dot(mesh.areas[patch],
                                 np.linalg.norm(field_values[patch], axis=1) ** p))
            best = max(best, integ / r ** lam)
    return best
