"""Interface-conforming triangulations of the disk with a circular inclusion.

The primary builder meshes the disk B_R with a concentric circular interface
of radius rho: structured annular rings with a common angular count, plus a
fan around the center vertex.  Ring radii are chosen so one ring lies exactly
on the interface circle, which makes the triangulation conform to the
interface (every interface edge separates a region-1 triangle from a
region-2 triangle and its endpoints sit on the circle to machine precision).

A square mesh with a straight horizontal interface is shipped as a sanity
fixture for flat-interface tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError

_GAUSS2 = (-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0))


@dataclass
class Mesh:
    """Immutable conforming triangulation with region tags and interface data.

    vertices        (n, 2) coordinates
    triangles       (m, 3) vertex indices, positively oriented
    region          (m,) tags in {1, 2}; 1 is the inner region
    boundary_vertices  indices on the outer boundary
    interface_edges (k, 2) vertex pairs on the interface
    interface_normals (k, 2) unit normals pointing into region 1
    interface_weights (k,) edge lengths
    h               max edge length
    """

    vertices: np.ndarray
    triangles: np.ndarray
    region: np.ndarray
    boundary_vertices: np.ndarray
    interface_edges: np.ndarray
    interface_normals: np.ndarray
    interface_weights: np.ndarray
    h: float
    R: float
    rho: float
    _areas: np.ndarray = field(default=None, repr=False)
    _barycenters: np.ndarray = field(default=None, repr=False)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @property
    def areas(self):
        if self._areas is None:
            p = self.vertices[self.triangles]
            e1 = p[:, 1] - p[:, 0]
            e2 = p[:, 2] - p[:, 0]
            self._areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        return self._areas

    @property
    def barycenters(self):
        if self._barycenters is None:
            self._barycenters = self.vertices[self.triangles].mean(axis=1)
        return self._barycenters

    @property
    def free_vertices(self):
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = False
        return np.nonzero(mask)[0]


def build_disk_mesh(R: float, rho: float, h_target: float) -> Mesh:
    """Mesh the disk B_R conforming to the circle of radius rho.

    Achieved h is at most ~1.5 * h_target (ring/arc spacing <= h_target, the
    quad diagonals account for the factor).
    """
    if not (0 < rho < R):
        raise MeshError(f"need 0 < rho < R, got rho={rho}, R={R}")
    if not (0 < h_target <= (R - rho) / 2):
        raise MeshError(f"h_target={h_target} infeasible for R={R}, rho={rho}")

    m_ang = max(16, int(np.ceil(2 * np.pi * R / h_target)))
    n_in = max(2, int(np.ceil(rho / h_target)))
    n_out = max(2, int(np.ceil((R - rho) / h_target)))
    radii = np.concatenate([
        np.linspace(0.0, rho, n_in + 1)[1:],
        np.linspace(rho, R, n_out + 1)[1:],
    ])
    n_rings = radii.size
    iface_ring = n_in - 1  # ring sitting exactly on the interface circle

    theta = 2 * np.pi * np.arange(m_ang) / m_ang
    ct, st = np.cos(theta), np.sin(theta)
    verts = np.empty((1 + n_rings * m_ang, 2))
    verts[0] = 0.0
    for k, r in enumerate(radii):
        verts[1 + k * m_ang: 1 + (k + 1) * m_ang, 0] = r * ct
        verts[1 + k * m_ang: 1 + (k + 1) * m_ang, 1] = r * st

    def ring(k):
        return 1 + k * m_ang + np.arange(m_ang)

    nxt = np.roll(np.arange(m_ang), -1)
    tris = []
    r0 = ring(0)
    tris.append(np.stack([np.zeros(m_ang, dtype=int), r0, r0[nxt]], axis=1))
    for k in range(n_rings - 1):
        a, b = ring(k), ring(k + 1)
        # CCW quad (a_i, b_i, b_{i+1}, a_{i+1}) split along the a_i-b_{i+1} diagonal
        tris.append(np.stack([a, b, b[nxt]], axis=1))
        tris.append(np.stack([a, b[nxt], a[nxt]], axis=1))
    triangles = np.concatenate(tris, axis=0)

    mesh = Mesh(
        vertices=verts,
        triangles=triangles,
        region=None,
        boundary_vertices=ring(n_rings - 1),
        interface_edges=None,
        interface_normals=None,
        interface_weights=None,
        h=0.0,
        R=R,
        rho=rho,
    )
    bc = mesh.barycenters
    mesh.region = np.where(np.linalg.norm(bc, axis=1) < rho, 1, 2)

    iv = ring(iface_ring)
    edges = np.stack([iv, iv[nxt]], axis=1)
    pts = verts[edges]
    mid = pts.mean(axis=1)
    normals = -mid / np.linalg.norm(mid, axis=1, keepdims=True)
    weights = np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)
    mesh.interface_edges = edges
    mesh.interface_normals = normals
    mesh.interface_weights = weights

    p = verts[triangles]
    elens = [np.linalg.norm(p[:, i] - p[:, j], axis=1).max()
             for i, j in ((0, 1), (1, 2), (2, 0))]
    mesh.h = float(max(elens))

    if np.any(mesh.areas <= 0):
        raise MeshError("non-positive triangle area")
    return mesh


def build_flat_interface_mesh(L: float, h_target: float) -> Mesh:
    """Square [-L/2, L/2]^2 split by the horizontal line y = 0.

    Sanity fixture only: region 1 is y < 0, interface normals point down.
    """
    if not (0 < h_target < L / 4):
        raise MeshError("infeasible parameters for flat-interface mesh")
    n = max(4, int(np.ceil(L / h_target)))
    if n % 2:
        n += 1  # keep a vertex row exactly on y = 0
    xs = np.linspace(-L / 2, L / 2, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    verts = np.stack([X.ravel(), Y.ravel()], axis=1)

    def vid(i, j):
        return j * (n + 1) + i

    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ii, jj = ii.ravel(), jj.ravel()
    a = vid(ii, jj)
    b = vid(ii + 1, jj)
    c = vid(ii + 1, jj + 1)
    d = vid(ii, jj + 1)
    triangles = np.concatenate([
        np.stack([a, b, c], axis=1),
        np.stack([a, c, d], axis=1),
    ])

    on_bnd = (np.abs(np.abs(verts[:, 0]) - L / 2) < 1e-12) | \
             (np.abs(np.abs(verts[:, 1]) - L / 2) < 1e-12)

    mesh = Mesh(
        vertices=verts,
        triangles=triangles,
        region=None,
        boundary_vertices=np.nonzero(on_bnd)[0],
        interface_edges=None,
        interface_normals=None,
        interface_weights=None,
        h=0.0,
        R=L / 2,
        rho=0.0,
    )
    mesh.region = np.where(mesh.barycenters[:, 1] < 0, 1, 2)

    jmid = n // 2
    iv = vid(np.arange(n + 1), np.full(n + 1, jmid))
    edges = np.stack([iv[:-1], iv[1:]], axis=1)
    mesh.interface_edges = edges
    mesh.interface_normals = np.tile([0.0, -1.0], (n, 1))
    mesh.interface_weights = np.full(n, L / n)
    p = verts[triangles]
    mesh.h = float(max(np.linalg.norm(p[:, i] - p[:, j], axis=1).max()
                       for i, j in ((0, 1), (1, 2), (2, 0))))
    return mesh


def ball_patch(mesh: Mesh, x0, r: float):
    """Indices of triangles whose barycenter lies in the open ball B_r(x0)."""
    x0 = np.asarray(x0, dtype=float)
    if np.linalg.norm(x0) + r > mesh.R * (1 + 1e-12):
        raise MeshError(f"ball B_{r}({x0}) not contained in the domain")
    dist = np.linalg.norm(mesh.barycenters - x0, axis=1)
    return np.nonzero(dist < r)[0]


def interface_quadrature(mesh: Mesh):
    """2-point Gauss rule on each interface edge.

    Returns (points (k,2,2), weights (k,2), normals (k,2)); weights sum to
    the polygonal interface length.
    """
    pts = mesh.vertices[mesh.interface_edges]
    mid = pts.mean(axis=1)
    half = 0.5 * (pts[:, 1] - pts[:, 0])
    qpts = np.stack([mid + g * half for g in _GAUSS2], axis=1)
    w = np.repeat(mesh.interface_weights[:, None] / 2.0, 2, axis=1)
    return qpts, w, mesh.interface_normals


def export_csv(mesh: Mesh, out_dir, config_hash: str = ""):
    """Write vertices.csv, triangles.csv and interface.csv into out_dir."""
    import os

    header = f"# config_hash={config_hash}\n" if config_hash else ""
    on_bnd = np.zeros(mesh.n_vertices, dtype=int)
    on_bnd[mesh.boundary_vertices] = 1
    with open(os.path.join(out_dir, "vertices.csv"), "w") as fh:
        fh.write(header + "id,x,y,on_boundary\n")
        for i, (x, y) in enumerate(mesh.vertices):
            fh.write(f"{i},{float(x)!r},{float(y)!r},{on_bnd[i]}\n")
    with open(os.path.join(out_dir, "triangles.csv"), "w") as fh:
        fh.write(header + "id,v0,v1,v2,region\n")
        for i, (t, reg) in enumerate(zip(mesh.triangles, mesh.region)):
            fh.write(f"{i},{t[0]},{t[1]},{t[2]},{reg}\n")
    with open(os.path.join(out_dir, "interface.csv"), "w") as fh:
        fh.write(header + "v0,v1,nx,ny,weight\n")
        for (a, b), (nx, ny), w in zip(mesh.interface_edges,
                                       mesh.interface_normals,
                                       mesh.interface_weights):
            fh.write(f"{a},{b},{float(nx)!r},{float(ny)!r},{float(w)!r}\n")
