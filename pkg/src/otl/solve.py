"""Damped Newton minimization of the regularized interface energy.

The unregularized energy is degenerate wherever Du = 0 (and the radial
benchmark has Du = 0 on the whole inner region), so the solver runs a
geometric continuation delta0 -> delta_min with warm starts.  Each stage is
damped Newton with Armijo backtracking on the energy; the Newton systems are
solved by Jacobi-preconditioned CG with a steepest-descent fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fem, orlicz
from .errors import DomainError, SolverError
from .mesh import Mesh, ball_patch

_ARMijo_MAX_HALVINGS = 50


@dataclass
class SolverConfig:
    delta0: float = 1e-1
    delta_min: float = 1e-6
    delta_shrink: float = 0.1
    grad_tol: float | None = None  # None -> 1e-9 * load norm
    max_newton: int = 100
    armijo_c: float = 1e-4
    cg_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.delta_min <= self.delta0):
            raise DomainError("need 0 < delta_min <= delta0")
        if not (0 < self.delta_shrink < 1):
            raise DomainError("delta_shrink must be in (0, 1)")
        if not (0 < self.armijo_c < 0.5):
            raise DomainError("armijo_c must be in (0, 0.5)")
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise DomainError("grad_tol must be positive")
        if not self.cg_tol > 0:
            raise DomainError("cg_tol must be positive")


def cg_solve(H, b, tol: float, max_iter: int | None = None, precond_diag=None):
    """Conjugate gradients for SPD H: ||Hx - b|| <= tol * ||b||.

    Deterministic; optional Jacobi preconditioning via precond_diag.
    Raises SolverError when the iteration cap (default 10n) is exceeded.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    if max_iter is None:
        max_iter = 10 * n
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n)
    x = np.zeros(n)
    r = b.copy()
    minv = None if precond_diag is None else 1.0 / precond_diag
    z = r if minv is None else minv * r
    p = z.copy()
    rz = float(np.dot(r, z))
    for _ in range(max_iter):
        if np.linalg.norm(r) <= tol * bnorm:
            return x
        Hp = H @ p
        curv = float(np.dot(p, Hp))
        if not curv > 0:
            raise SolverError("CG encountered nonpositive curvature: matrix not SPD")
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Hp
        z = r if minv is None else minv * r
        rz_new = float(np.dot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    if np.linalg.norm(r) <= tol * bnorm:
        return x
    raise SolverError(f"CG did not converge within {max_iter} iterations")


def _delta_schedule(cfg: SolverConfig):
    deltas = []
    d = cfg.delta0
    while d > cfg.delta_min * (1 + 1e-12):
        deltas.append(d)
        d *= cfg.delta_shrink
    deltas.append(cfg.delta_min)
    return deltas


def _minimize_patch(mesh, nl, coeffs, free, tri_subset, load, cfg, trace):
    """Damped Newton over the given free vertices / triangle subset.

    Mutates coeffs in place; load is indexed by free.  Returns final
    residual norm.
    """
    ops = fem.element_ops(mesh)
    areas = mesh.areas[tri_subset] if tri_subset is not None else mesh.areas
    tris = mesh.triangles[tri_subset] if tri_subset is not None else mesh.triangles
    B = ops.B[tri_subset] if tri_subset is not None else ops.B
    nv = mesh.n_vertices
    import scipy.sparse as sp

    free_mask = np.zeros(nv, dtype=bool)
    free_mask[free] = True
    pos = -np.ones(nv, dtype=int)
    pos[free] = np.arange(free.size)

    def energy(c, delta):
        Du = np.einsum("tdi,ti->td", B, c[tris])
        m = np.sqrt(np.sum(Du * Du, axis=1) + delta * delta)
        return float(np.dot(areas, orlicz.eval_G(nl, m))) - float(np.dot(load, c[free]))

    def gradient(c, delta):
        Du = np.einsum("tdi,ti->td", B, c[tris])
        m = np.sqrt(np.sum(Du * Du, axis=1) + delta * delta)
        factor = orlicz.eval_g(nl, m) / m
        contrib = np.einsum("t,td,tdi->ti", areas * factor, Du, B)
        g = np.zeros(nv)
        np.add.at(g, tris, contrib)
        return g[free] - load

    def hessian(c, delta):
        Du = np.einsum("tdi,ti->td", B, c[tris])
        J = orlicz.flux_delta_jacobian(nl, Du, delta)
        K = np.einsum("tai,tab,tbj->tij", B, J, B)
        K = 0.5 * (K + K.transpose(0, 2, 1))
        K *= areas[:, None, None]
        rows = np.repeat(tris, 3, axis=1).ravel()
        cols = np.tile(tris, (1, 3)).ravel()
        keep = free_mask[rows] & free_mask[cols]
        H = sp.coo_matrix((K.reshape(-1)[keep],
                           (pos[rows[keep]], pos[cols[keep]])),
                          shape=(free.size, free.size)).tocsr()
        return H

    load_norm = float(np.linalg.norm(load))
    tol = cfg.grad_tol if cfg.grad_tol is not None else 1e-9 * max(load_norm, 1.0)

    residual = None
    for delta in _delta_schedule(cfg):
        E = energy(coeffs, delta)
        for it in range(cfg.max_newton):
            g = gradient(coeffs, delta)
            residual = float(np.linalg.norm(g))
            if residual <= tol:
                break
            H = hessian(coeffs, delta)
            try:
                step = cg_solve(H, -g, cfg.cg_tol, precond_diag=H.diagonal())
            except SolverError:
                step = -g / max(float(H.diagonal().max()), 1e-300)
            gTs = float(np.dot(g, step))
            if gTs >= 0:  # not a descent direction; fall back
                step = -g
                gTs = -residual ** 2
            t = 1.0
            halvings = 0
            while True:
                trial = coeffs.copy()
                trial[free] += t * step
                E_new = energy(trial, delta)
                if E_new <= E + cfg.armijo_c * t * gTs:
                    break
                t *= 0.5
                halvings += 1
                if halvings > _ARMijo_MAX_HALVINGS:
                    raise SolverError("Armijo line search failed after 50 halvings")
            coeffs[free] += t * step
            E = E_new
            if trace is not None:
                trace.append({"stage_delta": delta, "iter": it,
                              "energy": E, "residual": residual, "step_len": t})
    residual = float(np.linalg.norm(gradient(coeffs, cfg.delta_min)))
    return residual, tol


def minimize(mesh: Mesh, nl, f: fem.InterfaceData, config: SolverConfig | None = None,
             u0: fem.DiscreteField | None = None):
    """Minimize the regularized energy; returns (DiscreteField, trace list).

    The returned field satisfies weak_residual(..., delta_min) <= grad_tol.
    """
    cfg = config or SolverConfig()
    rep = orlicz.validate_ellipticity(nl)
    if not rep["pass"]:
        raise DomainError(f"nonlinearity failed ellipticity validation: {rep}")
    load = fem.interface_load(mesh, f)
    free = mesh.free_vertices
    coeffs = np.zeros(mesh.n_vertices) if u0 is None else u0.coeffs.copy()
    coeffs[mesh.boundary_vertices] = 0.0
    trace = []
    residual, tol = _minimize_patch(mesh, nl, coeffs, free, None,
                                    load[free], cfg, trace)
    if residual > tol:
        raise SolverError(f"residual {residual:g} above tolerance {tol:g}")
    return fem.DiscreteField(mesh, coeffs), trace


def p_harmonic_replacement(mesh: Mesh, nl, u_bc: fem.DiscreteField, ball,
                           config: SolverConfig | None = None):
    """Energy minimizer on a ball patch with u_bc as boundary/exterior data.

    Discrete analogue of the comparison construction: agrees with u_bc
    outside the patch and on patch-boundary vertices, minimizes the Orlicz
    energy over the interior patch vertices.
    """
    cfg = config or SolverConfig()
    x0, r = ball
    patch = ball_patch(mesh, x0, r)
    if patch.size == 0:
        return u_bc.copy(), []
    patch_tris = mesh.triangles[patch]
    in_patch = np.zeros(mesh.n_triangles, dtype=bool)
    in_patch[patch] = True
    # vertices incident to any non-patch triangle are pinned
    touched = np.zeros(mesh.n_vertices, dtype=bool)
    touched[np.unique(patch_tris)] = True
    pinned = np.zeros(mesh.n_vertices, dtype=bool)
    pinned[np.unique(mesh.triangles[~in_patch])] = True
    pinned[mesh.boundary_vertices] = True
    free = np.nonzero(touched & ~pinned)[0]
    coeffs = u_bc.coeffs.copy()
    if free.size == 0:
        return fem.DiscreteField(mesh, coeffs), []
    trace = []
    _minimize_patch(mesh, nl, coeffs, free, patch, np.zeros(free.size), cfg, trace)
    return fem.DiscreteField(mesh, coeffs), trace
