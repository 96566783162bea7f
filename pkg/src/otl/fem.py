"""P1 discretization of the regularized interface energy.

Fields are piecewise linear, zero on the outer boundary.  Gradients are
piecewise constant, so the volume term Sum_T |T| * G(sqrt(|Du|_T^2 + d^2))
is evaluated without quadrature error; the interface load uses the mesh's
2-point edge rule (8-point near the singular angle of an angular-power
datum).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import orlicz
from .errors import DomainError, SolverError, StructuralError
from .mesh import Mesh, interface_quadrature


@dataclass
class InterfaceData:
    """Interface datum f on the circle.

    constant:       f = c, declared bounded.
    angular-power:  f(theta) = c * |wrap(theta - theta0)|^(-s), unbounded at
                    theta0; requires s*(p' + eps) < 1 for the declared
                    Sobolev membership to be arithmetically plausible.
    """

    kind: str
    c: float
    s: float = 0.0
    theta0: float = 0.0
    p: float | None = None
    eps: float | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "angular-power"):
            raise DomainError(f"unknown interface data kind {self.kind!r}")
        if self.kind == "angular-power":
            if not self.s >= 0:
                raise DomainError("angular-power exponent s must be >= 0")
            if self.p is None or self.eps is None:
                raise DomainError("angular-power data needs p and eps")
            p_conj = self.p / (self.p - 1.0)
            if not self.s * (p_conj + self.eps) < 1.0:
                raise DomainError(
                    f"s*(p'+eps) = {self.s * (p_conj + self.eps):g} >= 1: "
                    "declared Sobolev membership implausible")

    @property
    def bounded(self):
        return self.kind == "constant" or self.s == 0.0

    @property
    def sup_norm(self):
        if not self.bounded:
            raise DomainError("angular-power datum with s > 0 is unbounded")
        return abs(self.c)

    def __call__(self, pts):
        """Evaluate f at points (..., 2)."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "constant" or self.s == 0.0:
            return np.full(pts.shape[:-1], self.c)
        th = np.arctan2(pts[..., 1], pts[..., 0])
        w = np.angle(np.exp(1j * (th - self.theta0)))
        return self.c * np.abs(w) ** (-self.s)


@dataclass
class DiscreteField:
    """Vertex coefficients of a P1 field; zero on the outer boundary."""

    mesh: Mesh
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.mesh.n_vertices,):
            raise StructuralError("coefficient vector does not match the mesh")
        self.coeffs[self.mesh.boundary_vertices] = 0.0

    def copy(self):
        return DiscreteField(self.mesh, self.coeffs.copy())


def zero_field(mesh: Mesh) -> DiscreteField:
    return DiscreteField(mesh, np.zeros(mesh.n_vertices))


def interpolate(mesh: Mesh, fn) -> DiscreteField:
    """Vertex interpolant of fn(x, y); boundary values forced to zero."""
    vals = fn(mesh.vertices[:, 0], mesh.vertices[:, 1])
    return DiscreteField(mesh, np.asarray(vals, dtype=float))


class ElementOps:
    """Per-triangle gradient operator and assembly scatter for a mesh.

    Cached on the mesh object; construction is vectorized over triangles.
    B has shape (m, 2, 3): Du_T = sum_i coeffs[v_i] * B[T, :, i].
    """

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        p = mesh.vertices[mesh.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        det = (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])[:, None]
        g1 = np.stack([e2[:, 1], -e2[:, 0]], axis=1) / det
        g2 = np.stack([-e1[:, 1], e1[:, 0]], axis=1) / det
        g0 = -(g1 + g2)
        self.B = np.stack([g0, g1, g2], axis=2)
        self.areas = mesh.areas

    def gradients(self, coeffs, tri_subset=None):
        tris = self.mesh.triangles if tri_subset is None else self.mesh.triangles[tri_subset]
        B = self.B if tri_subset is None else self.B[tri_subset]
        u = coeffs[tris]  # (m, 3)
        return np.einsum("tdi,ti->td", B, u)


def element_ops(mesh: Mesh) -> ElementOps:
    ops = getattr(mesh, "_element_ops", None)
    if ops is None:
        ops = ElementOps(mesh)
        mesh._element_ops = ops
    return ops


def gradient_field(mesh: Mesh, u: DiscreteField):
    """Per-triangle constant gradient of u, shape (m, 2)."""
    _check(mesh, u)
    return element_ops(mesh).gradients(u.coeffs)


def _check(mesh, u):
    if u.mesh is not mesh:
        raise StructuralError("field does not belong to this mesh")


def interface_load(mesh: Mesh, f: InterfaceData):
    """Load vector over all vertices: sum_q w_q f(x_q) phi_i(x_q).

    Cached per (mesh, data).  For angular-power data, edges whose angular
    span comes close to theta0 use an 8-point Gauss rule.
    """
    cache = getattr(mesh, "_load_cache", None)
    if cache is None:
        cache = mesh._load_cache = {}
    key = (f.kind, f.c, f.s, f.theta0)
    if key in cache:
        return cache[key]

    pts = mesh.vertices[mesh.interface_edges]  # (k, 2, 2)
    load = np.zeros(mesh.n_vertices)

    def accumulate(edge_ids, nodes, weights):
        # nodes in (-1, 1) along each edge; shape functions (1-s)/2, (1+s)/2
        sel = pts[edge_ids]
        mid = sel.mean(axis=1)
        half = 0.5 * (sel[:, 1] - sel[:, 0])
        for g, wg in zip(nodes, weights):
            x = mid + g * half
            fv = f(x)
            w_edge = mesh.interface_weights[edge_ids] * (wg / 2.0)
            phi0 = (1.0 - g) / 2.0
            phi1 = (1.0 + g) / 2.0
            np.add.at(load, mesh.interface_edges[edge_ids, 0], w_edge * fv * phi0)
            np.add.at(load, mesh.interface_edges[edge_ids, 1], w_edge * fv * phi1)

    k = mesh.interface_edges.shape[0]
    all_ids = np.arange(k)
    if f.kind == "angular-power" and f.s > 0:
        th = np.arctan2(pts[..., 1], pts[..., 0])  # (k, 2)
        dist = np.abs(np.angle(np.exp(1j * (th - f.theta0)))).min(axis=1)
        span = mesh.interface_weights / np.maximum(mesh.rho, 1e-300)
        near = dist <= 2.0 * span
        n8, w8 = np.polynomial.legendre.leggauss(8)
        accumulate(all_ids[near], n8, w8)
        n2, w2 = np.polynomial.legendre.leggauss(2)
        accumulate(all_ids[~near], n2, w2)
    else:
        n2, w2 = np.polynomial.legendre.leggauss(2)
        accumulate(all_ids, n2, w2)

    load.setflags(write=False)
    cache[key] = load
    return load


def assemble_energy(mesh: Mesh, nl, f: InterfaceData, u: DiscreteField, delta: float = 0.0):
    """Sum_T |T| G(sqrt(|Du|^2 + delta^2)) - sum_q w_q f(x_q) u(x_q)."""
    _check(mesh, u)
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    Du = gradient_field(mesh, u)
    m = np.sqrt(np.sum(Du * Du, axis=1) + delta * delta)
    vol = float(np.dot(mesh.areas, orlicz.eval_G(nl, m)))
    load = interface_load(mesh, f)
    return vol - float(np.dot(load, u.coeffs))


def assemble_gradient(mesh: Mesh, nl, f: InterfaceData, u: DiscreteField, delta: float):
    """Derivative of assemble_energy w.r.t. the free vertex coefficients."""
    _check(mesh, u)
    ops = element_ops(mesh)
    Du = ops.gradients(u.coeffs)
    m2 = np.sum(Du * Du, axis=1)
    if delta == 0.0:
        if np.any(m2 == 0.0):
            raise SolverError("unregularized gradient with a zero-gradient triangle")
        m = np.sqrt(m2)
    else:
        m = np.sqrt(m2 + delta * delta)
    factor = orlicz.eval_g(nl, m) / m  # (m,)
    # contribution |T| * g(m)/m * (Du . grad phi_i)
    contrib = np.einsum("t,td,tdi->ti", mesh.areas * factor, Du, ops.B)
    grad = np.zeros(mesh.n_vertices)
    np.add.at(grad, mesh.triangles, contrib)
    grad -= interface_load(mesh, f)
    return grad[mesh.free_vertices]


def assemble_hessian(mesh: Mesh, nl, u: DiscreteField, delta: float):
    """Sparse SPD Hessian of the regularized volume energy on free vertices."""
    _check(mesh, u)
    if not delta > 0:
        raise DomainError("delta must be positive")
    ops = element_ops(mesh)
    Du = ops.gradients(u.coeffs)
    J = orlicz.flux_delta_jacobian(nl, Du, delta)  # (m, 2, 2)
    K = np.einsum("tai,tab,tbj->tij", ops.B, J, ops.B)
    K = 0.5 * (K + K.transpose(0, 2, 1))
    K *= mesh.areas[:, None, None]

    tris = mesh.triangles
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    vals = K.reshape(-1)
    n = mesh.n_vertices
    H = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    free = mesh.free_vertices
    H = H[free][:, free]
    return 0.5 * (H + H.T).tocsr()


def weak_residual(mesh: Mesh, nl, f: InterfaceData, u: DiscreteField, delta: float):
    """Euclidean norm of the assembled gradient (discrete weak-form defect)."""
    return float(np.linalg.norm(assemble_gradient(mesh, nl, f, u, delta)))


def export_solution_csv(mesh: Mesh, u: DiscreteField, path, config_hash: str = ""):
    header = f"# config_hash={config_hash}\n" if config_hash else ""
    with open(path, "w") as fh:
        fh.write(header + "vertex_id,x,y,u\n")
        for i, ((x, y), v) in enumerate(zip(mesh.vertices, u.coeffs)):
            fh.write(f"{i},{float(x)!r},{float(y)!r},{float(v)!r}\n")


def export_gradient_csv(mesh: Mesh, u: DiscreteField, path, config_hash: str = ""):
    Du = gradient_field(mesh, u)
    bc = mesh.barycenters
    header = f"# config_hash={config_hash}\n" if config_hash else ""
    with open(path, "w") as fh:
        fh.write(header + "tri_id,cx,cy,dux,duy,region\n")
        for i in range(mesh.n_triangles):
            fh.write(f"{i},{float(bc[i, 0])!r},{float(bc[i, 1])!r},"
                     f"{float(Du[i, 0])!r},{float(Du[i, 1])!r},{mesh.region[i]}\n")
