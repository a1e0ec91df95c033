"""P1 vector finite elements on structured rectangle triangulations.

Assembles the linear-elasticity stiffness a(v,w) = int 2 mu eps(v):eps(w)
+ lambda tr eps(v) tr eps(w) and the rho-weighted consistent mass on
piecewise-linear triangles, with Dirichlet handling by symmetric elimination
so the reduced operators stay SPD.  Degrees of freedom interleave as
(ux_0, uy_0, ux_1, uy_1, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .solvers import make_spd_solver

__all__ = [
    "Mesh",
    "ElasticParams",
    "AssembledSystem",
    "DIRICHLET",
    "NEUMANN",
    "build_rect_mesh",
    "assemble",
    "traction_load",
    "volume_load",
    "apply_dirichlet",
    "quasi_static_solve",
    "side_traction",
    "constant_volume",
]

DIRICHLET = 0
NEUMANN = 1

# boundary side ids for structured rectangles
SIDE_LEFT, SIDE_RIGHT, SIDE_BOTTOM, SIDE_TOP = 0, 1, 2, 3
SIDE_NAMES = {"left": SIDE_LEFT, "right": SIDE_RIGHT,
              "bottom": SIDE_BOTTOM, "top": SIDE_TOP}


@dataclass(frozen=True)
class ElasticParams:
    """Lame constants mu, lam (Pa) and mass density rho (kg/m^3)."""

    mu: float
    lam: float
    rho: float

    def __post_init__(self):
        for name in ("mu", "lam", "rho"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class Mesh:
    vertices: np.ndarray       # (nv, 2) float
    triangles: np.ndarray      # (nt, 3) int, counterclockwise
    boundary_edges: np.ndarray  # (ne, 2) int vertex pairs
    edge_tags: np.ndarray      # (ne,) DIRICHLET or NEUMANN
    edge_sides: np.ndarray     # (ne,) side id on structured meshes

    def __post_init__(self):
        areas = self.signed_areas()
        if np.any(areas <= 0.0):
            raise ValueError("all triangles must be counterclockwise")

    def signed_areas(self):
        v = self.vertices[self.triangles]
        return 0.5 * ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
                      - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def h(self):
        """Mesh size: length of the longest edge."""
        v = self.vertices[self.triangles]
        e = np.concatenate([v[:, 1] - v[:, 0], v[:, 2] - v[:, 1],
                            v[:, 0] - v[:, 2]])
        return float(np.max(np.hypot(e[:, 0], e[:, 1])))

    def dirichlet_vertices(self):
        edges = self.boundary_edges[self.edge_tags == DIRICHLET]
        return np.unique(edges)

    def nearest_vertex(self, point, tol=1e-9):
        """Index of the vertex closest to ``point``; warns beyond ``tol``."""
        import warnings

        d = np.hypot(self.vertices[:, 0] - point[0],
                     self.vertices[:, 1] - point[1])
        idx = int(np.argmin(d))
        if d[idx] > tol:
            warnings.warn(
                f"probe point {tuple(point)} snapped to vertex {idx} at "
                f"distance {d[idx]:.3e}", stacklevel=2)
        return idx

    def vertices_csv(self):
        lines = ["index,x,y"]
        lines += [f"{i},{x!r},{y!r}" for i, (x, y) in enumerate(self.vertices)]
        return "\n".join(lines) + "\n"

    def triangles_csv(self):
        lines = ["index,v0,v1,v2"]
        lines += [f"{i},{a},{b},{c}" for i, (a, b, c) in enumerate(self.triangles)]
        return "\n".join(lines) + "\n"

    def boundary_csv(self):
        lines = ["index,v0,v1,tag,side"]
        for i, ((a, b), t, s) in enumerate(
                zip(self.boundary_edges, self.edge_tags, self.edge_sides)):
            lines.append(f"{i},{a},{b},{t},{s}")
        return "\n".join(lines) + "\n"


def build_rect_mesh(nx, ny, lx=1.0, ly=1.0):
    """Uniform nx-by-ny grid on [0,lx]x[0,ly], cells split along one diagonal.

    Edges on x = 0 are tagged Dirichlet, the rest Neumann.
    """
    if nx < 1 or ny < 1:
        raise ValueError("need nx, ny >= 1")
    if lx <= 0.0 or ly <= 0.0:
        raise ValueError("need lx, ly > 0")
    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    xx, yy = np.meshgrid(xs, ys, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, jj):
        return jj * (nx + 1) + i

    tris = []
    for jj in range(ny):
        for i in range(nx):
            v00, v10 = vid(i, jj), vid(i + 1, jj)
            v01, v11 = vid(i, jj + 1), vid(i + 1, jj + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    edges, tags, sides = [], [], []
    for jj in range(ny):  # vertical sides
        edges.append((vid(0, jj), vid(0, jj + 1)))
        tags.append(DIRICHLET)
        sides.append(SIDE_LEFT)
        edges.append((vid(nx, jj), vid(nx, jj + 1)))
        tags.append(NEUMANN)
        sides.append(SIDE_RIGHT)
    for i in range(nx):  # horizontal sides
        edges.append((vid(i, 0), vid(i + 1, 0)))
        tags.append(NEUMANN)
        sides.append(SIDE_BOTTOM)
        edges.append((vid(i, ny), vid(i + 1, ny)))
        tags.append(NEUMANN)
        sides.append(SIDE_TOP)
    return Mesh(vertices=vertices,
                triangles=np.asarray(tris, dtype=np.int32),
                boundary_edges=np.asarray(edges, dtype=np.int32),
                edge_tags=np.asarray(tags, dtype=np.int8),
                edge_sides=np.asarray(sides, dtype=np.int8))


def _element_matrices(mesh, ep, lumped):
    v = mesh.vertices[mesh.triangles]            # (nt, 3, 2)
    x, y = v[..., 0], v[..., 1]
    area = 0.5 * ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
                  - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    # gradients of the barycentric basis
    bx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]],
                  axis=1) / (2.0 * area)[:, None]
    by = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]],
                  axis=1) / (2.0 * area)[:, None]
    nt = area.size
    bmat = np.zeros((nt, 3, 6))
    bmat[:, 0, 0::2] = bx
    bmat[:, 1, 1::2] = by
    bmat[:, 2, 0::2] = by
    bmat[:, 2, 1::2] = bx
    mu, lam = ep.mu, ep.lam
    dmat = np.array([[2 * mu + lam, lam, 0.0],
                     [lam, 2 * mu + lam, 0.0],
                     [0.0, 0.0, mu]])
    ke = np.einsum("tia,ij,tjb,t->tab", bmat, dmat, bmat, area, optimize=True)
    m_scalar = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    if lumped:
        m_scalar = np.diag(m_scalar.sum(axis=1))
    me = np.zeros((nt, 6, 6))
    for comp in range(2):
        me[:, comp::2, comp::2] = (ep.rho * area)[:, None, None] * m_scalar
    return ke, me


def _scatter(mesh, elem):
    nt = elem.shape[0]
    dofs = np.empty((nt, 6), dtype=np.int64)
    dofs[:, 0::2] = 2 * mesh.triangles
    dofs[:, 1::2] = 2 * mesh.triangles + 1
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    ndof = 2 * mesh.n_vertices
    mat = sp.coo_matrix((elem.ravel(), (rows, cols)), shape=(ndof, ndof))
    return mat.tocsr()


@dataclass
class AssembledSystem:
    """Stiffness, mass and constraint data for one mesh/material pair."""

    mesh: Mesh
    elastic: ElasticParams
    K: sp.csr_matrix
    M: sp.csr_matrix
    constrained_dofs: np.ndarray
    free_dofs: np.ndarray
    volume: object = None     # f(points(m,2), t) -> (m,2), or None
    traction: object = None   # g(points(m,2), t, side(m,)) -> (m,2), or None
    lumped: bool = False
    _kff: sp.csr_matrix = field(default=None, repr=False)
    _mff: sp.csr_matrix = field(default=None, repr=False)

    @property
    def n_dofs(self):
        return self.K.shape[0]

    @property
    def Kff(self):
        if self._kff is None:
            self._kff = apply_dirichlet(self, self.K)
        return self._kff

    @property
    def Mff(self):
        if self._mff is None:
            self._mff = apply_dirichlet(self, self.M)
        return self._mff

    def restrict(self, full):
        return np.asarray(full)[..., self.free_dofs]

    def expand(self, reduced):
        reduced = np.asarray(reduced)
        full = np.zeros(reduced.shape[:-1] + (self.n_dofs,))
        full[..., self.free_dofs] = reduced
        return full

    def volume_load(self, t):
        if self.volume is None:
            return np.zeros(self.n_dofs)
        return volume_load(self.mesh, self.volume, t)

    def traction_vector(self, t):
        if self.traction is None:
            return np.zeros(self.n_dofs)
        return traction_load(self.mesh, self.traction, t)


def assemble(mesh, ep, volume=None, traction=None, lumped=False,
             extra_fixed_dofs=None):
    """Assemble stiffness and mass; Dirichlet set from mesh tags.

    ``extra_fixed_dofs`` pins additional dof indices (used to cut a system
    down to a small number of unknowns in verification setups).
    """
    ke, me = _element_matrices(mesh, ep, lumped)
    K = _scatter(mesh, ke)
    M = _scatter(mesh, me)
    dv = mesh.dirichlet_vertices()
    fixed = np.concatenate([2 * dv, 2 * dv + 1])
    if extra_fixed_dofs is not None:
        fixed = np.concatenate([fixed, np.asarray(extra_fixed_dofs,
                                                  dtype=np.int64)])
    if fixed.size == 0:
        raise ValueError("empty Dirichlet set: stiffness would be singular")
    fixed = np.unique(fixed)
    ndof = 2 * mesh.n_vertices
    free = np.setdiff1d(np.arange(ndof), fixed)
    return AssembledSystem(mesh=mesh, elastic=ep, K=K, M=M,
                           constrained_dofs=fixed, free_dofs=free,
                           volume=volume, traction=traction, lumped=lumped)


def apply_dirichlet(sys: AssembledSystem, obj):
    """Symmetric elimination: restrict a matrix or vector to free dofs."""
    if sp.issparse(obj):
        return obj[sys.free_dofs][:, sys.free_dofs].tocsr()
    return np.asarray(obj)[sys.free_dofs]


def traction_load(mesh, g, t=0.0):
    """Nodal load from boundary traction g on Neumann edges.

    Endpoint-trapezoid integration of the P1 traces: exact for edgewise
    constant g.  ``g(points, t, sides)`` returns one traction vector per
    point.
    """
    load = np.zeros(2 * mesh.n_vertices)
    sel = mesh.edge_tags == NEUMANN
    edges = mesh.boundary_edges[sel]
    sides = mesh.edge_sides[sel]
    if edges.size == 0:
        return load
    pa = mesh.vertices[edges[:, 0]]
    pb = mesh.vertices[edges[:, 1]]
    lengths = np.hypot(*(pb - pa).T)
    ga = np.asarray(g(pa, t, sides), dtype=np.float64)
    gb = np.asarray(g(pb, t, sides), dtype=np.float64)
    half = 0.5 * lengths
    np.add.at(load, 2 * edges[:, 0], half * ga[:, 0])
    np.add.at(load, 2 * edges[:, 0] + 1, half * ga[:, 1])
    np.add.at(load, 2 * edges[:, 1], half * gb[:, 0])
    np.add.at(load, 2 * edges[:, 1] + 1, half * gb[:, 1])
    return load


def volume_load(mesh, f, t=0.0):
    """Nodal load from the body force f via the edge-midpoint rule (exact
    through quadratic integrands, hence exact for constant and linear f)."""
    load = np.zeros(2 * mesh.n_vertices)
    v = mesh.vertices[mesh.triangles]
    area = np.abs(mesh.signed_areas())
    mids = 0.5 * (v + np.roll(v, -1, axis=1))     # (nt, 3, 2) edge midpoints
    fm = np.asarray(f(mids.reshape(-1, 2), t), dtype=np.float64).reshape(-1, 3, 2)
    # phi_i at the three edge midpoints is 1/2 on the two adjacent edges
    w = area[:, None] / 3.0
    for local in range(3):
        contrib = 0.5 * (fm[:, local] + fm[:, (local + 2) % 3]) * w
        np.add.at(load, 2 * mesh.triangles[:, local], contrib[:, 0])
        np.add.at(load, 2 * mesh.triangles[:, local] + 1, contrib[:, 1])
    return load


def side_traction(spec):
    """Traction callable from {side name: (gx, gy)}; zero elsewhere."""
    table = np.zeros((4, 2))
    for name, vec in spec.items():
        table[SIDE_NAMES[name]] = vec

    def g(points, t, sides):
        return table[np.asarray(sides, dtype=np.int64)]

    return g


def constant_volume(vec):
    """Constant body-force callable."""
    vec = np.asarray(vec, dtype=np.float64)

    def f(points, t):
        return np.broadcast_to(vec, (np.asarray(points).shape[0], 2))

    return f


def quasi_static_solve(sys: AssembledSystem, scale=1.0, t=0.0, rtol=1e-12):
    """Solve scale * a(u, v) = (f, v) + (g, v) for the static displacement.

    With scale = 1 - gamma this is the fully relaxed long-time limit of the
    viscoelastic problem under constant loads.
    """
    if not scale > 0.0:
        raise ValueError("scale must be positive")
    rhs = sys.restrict(sys.volume_load(t) + sys.traction_vector(t))
    solver = make_spd_solver(scale * sys.Kff, method="direct", rtol=rtol)
    return sys.expand(solver.solve(rhs))
