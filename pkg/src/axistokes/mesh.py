"""Triangulations of meridian domains and their kappa-graded refinement.

Each refinement splits every edge once and every triangle into four children
(red refinement). Edges touching a marked corner ``Q`` are split at the
fraction ``kappa`` measured from ``Q``; all other edges at the midpoint.
Children of triangle ``t`` are stored at indices ``4t .. 4t+3`` and coarse
nodes keep their indices, so a level-``j`` mesh embeds every coarser one.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .elements import LOCAL_EDGES
from .errors import MeshingFailed, NonConformingInput

__all__ = [
    "GAMMA0",
    "GAMMA",
    "TriMesh",
    "GradingPlan",
    "MeshHierarchy",
    "GradingReport",
    "initial_triangulation",
    "kappa_refine",
    "build_hierarchy",
    "grading_diagnostics",
    "write_mesh",
    "read_mesh",
    "write_mesh_csv",
]

GAMMA0 = 0  #: boundary tag for edges on the axis r = 0
GAMMA = 1   #: boundary tag for wall edges

_MAX_INITIAL_REFINEMENTS = 12


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Conforming, positively oriented triangulation.

    Attributes
    ----------
    nodes : ndarray (N, 2)
        Node coordinates ``(r, z)``.
    triangles : ndarray (T, 3)
        Node indices, counterclockwise.
    boundary_edges : ndarray (B, 2)
        Boundary edges oriented counterclockwise around the domain.
    boundary_tags : ndarray (B,)
        ``GAMMA0`` or ``GAMMA`` per boundary edge.
    level : int
    parent_map : ndarray (T,) or None
        Parent triangle at the previous level.
    corner_nodes : ndarray
        Node index of each domain vertex.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    level: int = 0
    parent_map: np.ndarray | None = None
    corner_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        for name in ("nodes", "triangles", "boundary_edges", "boundary_tags",
                     "parent_map", "corner_nodes"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @cached_property
    def _edge_data(self):
        t = self.triangles
        n = self.n_nodes
        loc = np.array(LOCAL_EDGES)
        a = t[:, loc[:, 0]]
        b = t[:, loc[:, 1]]
        lo = np.minimum(a, b).ravel()
        hi = np.maximum(a, b).ravel()
        keys = lo.astype(np.int64) * n + hi
        uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        edges = np.column_stack([uniq // n, uniq % n])
        return edges, inverse.reshape(-1, 3), counts

    @property
    def edges(self):
        """Unique edges ``(a, b)`` with ``a < b``, sorted."""
        return self._edge_data[0]

    @property
    def tri_edges(self):
        """Edge index of each local edge, shape (T, 3)."""
        return self._edge_data[1]

    @cached_property
    def edge_tags(self):
        """Per edge: -1 interior, else the boundary tag."""
        edges = self.edges
        n = self.n_nodes
        tags = np.full(len(edges), -1, dtype=np.int8)
        be = self.boundary_edges
        keys = np.minimum(be[:, 0], be[:, 1]).astype(np.int64) * n + np.maximum(be[:, 0], be[:, 1])
        ekeys = edges[:, 0] * n + edges[:, 1]
        idx = np.searchsorted(ekeys, keys)
        tags[idx] = self.boundary_tags
        return tags

    @cached_property
    def areas(self):
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @cached_property
    def edge_lengths(self):
        d = self.nodes[self.edges[:, 1]] - self.nodes[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def node_on_gamma0(self):
        m = np.zeros(self.n_nodes, dtype=bool)
        m[self.boundary_edges[self.boundary_tags == GAMMA0].ravel()] = True
        return m

    @cached_property
    def node_on_gamma(self):
        """Nodes on the closure of the wall boundary."""
        m = np.zeros(self.n_nodes, dtype=bool)
        m[self.boundary_edges[self.boundary_tags == GAMMA].ravel()] = True
        return m

    @cached_property
    def axis_triangles(self):
        """Triangles with at least one node on r = 0."""
        return np.any(self.nodes[self.triangles, 0] == 0.0, axis=1)

    def angles(self):
        """Interior angles of every triangle, shape (T, 3)."""
        p = self.nodes[self.triangles]
        out = np.empty((self.n_triangles, 3))
        for i in range(3):
            u = p[:, (i + 1) % 3] - p[:, i]
            v = p[:, (i + 2) % 3] - p[:, i]
            cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
            out[:, i] = np.arctan2(np.abs(cross), (u * v).sum(1))
        return out

    def check_conforming(self):
        """Raise :class:`NonConformingInput` unless the mesh is conforming."""
        if np.any(self.areas <= 0):
            raise NonConformingInput("triangle with non-positive orientation")
        counts = self._edge_data[2]
        if np.any(counts > 2):
            raise NonConformingInput("edge shared by more than two triangles")
        n_bd = int(np.sum(counts == 1))
        if n_bd != len(self.boundary_edges) or np.any(self.edge_tags[counts == 1] < 0):
            raise NonConformingInput("boundary edge table does not match triangle edges")

    def euler_characteristic(self):
        return self.n_nodes - len(self.edges) + self.n_triangles


@dataclass(frozen=True)
class GradingPlan:
    """Grading factor per marked domain vertex and the pressure degree k."""

    kappas: dict
    degree_k: int = 1

    def __post_init__(self):
        for vi, kap in self.kappas.items():
            if not 0.0 < kap <= 0.5:
                raise ValueError(f"kappa for vertex {vi} must lie in (0, 1/2], got {kap}")
        if self.degree_k < 1:
            raise ValueError("degree_k must be >= 1")

    @classmethod
    def uniform(cls, domain, kappa, degree_k=1):
        """The same ``kappa`` at every corner of ``domain``."""
        return cls({int(i): float(kappa) for i in domain.corners}, degree_k)

    @classmethod
    def single(cls, vertex, kappa, degree_k=1):
        return cls({int(vertex): float(kappa)}, degree_k)


# ---------------------------------------------------------------- initial mesh

def _in_triangle(p, a, b, c, eps):
    def cross(o, u, v):
        return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
    return cross(a, b, p) > -eps and cross(b, c, p) > -eps and cross(c, a, p) > -eps


def _ear_clip(v):
    n = len(v)
    idx = list(range(n))
    tris = []
    scale = float(np.ptp(v, axis=0).max()) ** 2
    eps = 1e-14 * scale
    while len(idx) > 3:
        for k in range(len(idx)):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = v[i0], v[i1], v[i2]
            area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if area2 <= eps:
                continue
            if any(_in_triangle(v[j], a, b, c, -eps) for j in idx if j not in (i0, i1, i2)):
                continue
            tris.append((i0, i1, i2))
            idx.pop(k)
            break
        else:
            raise MeshingFailed("ear clipping found no ear; polygon is degenerate")
    tris.append(tuple(idx))
    return np.array(tris, dtype=np.int64)


def _incircle(a, b, c, d):
    m = np.array([
        [a[0] - d[0], a[1] - d[1], (a[0] - d[0]) ** 2 + (a[1] - d[1]) ** 2],
        [b[0] - d[0], b[1] - d[1], (b[0] - d[0]) ** 2 + (b[1] - d[1]) ** 2],
        [c[0] - d[0], c[1] - d[1], (c[0] - d[0]) ** 2 + (c[1] - d[1]) ** 2],
    ])
    return np.linalg.det(m)


def _lawson_flips(v, tris):
    """Flip interior edges until the polygon triangulation is Delaunay."""
    tris = [list(t) for t in tris]
    scale = float(np.ptp(v, axis=0).max()) ** 4
    for _ in range(10 * len(tris) ** 2 + 10):
        owner = {}
        for ti, t in enumerate(tris):
            for a, b in LOCAL_EDGES:
                owner[(t[a], t[b])] = ti
        flipped = False
        for (a, b), ti in sorted(owner.items()):
            tj = owner.get((b, a))
            if tj is None or ti > tj:
                continue
            c = next(x for x in tris[ti] if x not in (a, b))
            d = next(x for x in tris[tj] if x not in (a, b))
            if _incircle(v[a], v[b], v[c], v[d]) > 1e-12 * scale:
                new1, new2 = [c, a, d], [d, b, c]
                ok = True
                for t in (new1, new2):
                    p = v[t]
                    ar = (p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0])
                    ok &= ar > 0
                if ok:
                    tris[ti], tris[tj] = new1, new2
                    flipped = True
                    break
        if not flipped:
            return np.array(tris, dtype=np.int64)
    raise MeshingFailed("edge flipping did not terminate")


def _polygon_mesh(domain):
    v = np.asarray(domain.vertices)
    n = len(v)
    tris = _lawson_flips(v, _ear_clip(v))
    bedges = np.array([(i, (i + 1) % n) for i in range(n)], dtype=np.int64)
    tags = np.array([GAMMA0 if i in domain.gamma0_edges else GAMMA for i in range(n)],
                    dtype=np.int8)
    return TriMesh(nodes=v.copy(), triangles=tris, boundary_edges=bedges,
                   boundary_tags=tags, level=0, parent_map=None,
                   corner_nodes=np.arange(n, dtype=np.int64))


def _red_refine(mesh, split_points, level, parent_map):
    n = mesh.n_nodes
    te = mesh.tri_edges + n
    t = mesh.triangles
    m01, m12, m20 = te[:, 0], te[:, 1], te[:, 2]
    children = np.stack([
        np.column_stack([t[:, 0], m01, m20]),
        np.column_stack([m01, t[:, 1], m12]),
        np.column_stack([m20, m12, t[:, 2]]),
        np.column_stack([m01, m12, m20]),
    ], axis=1).reshape(-1, 3)

    be = mesh.boundary_edges
    ekeys = mesh.edges[:, 0] * n + mesh.edges[:, 1]
    bkeys = np.minimum(be[:, 0], be[:, 1]) * n + np.maximum(be[:, 0], be[:, 1])
    mid = np.searchsorted(ekeys, bkeys) + n
    new_be = np.stack([np.column_stack([be[:, 0], mid]), np.column_stack([mid, be[:, 1]])],
                      axis=1).reshape(-1, 2)
    new_tags = np.repeat(mesh.boundary_tags, 2)
    nodes = np.vstack([mesh.nodes, split_points])
    return TriMesh(nodes=nodes, triangles=children, boundary_edges=new_be,
                   boundary_tags=new_tags, level=level, parent_map=parent_map,
                   corner_nodes=mesh.corner_nodes.copy())


def _midpoints(mesh):
    e = mesh.edges
    pts = 0.5 * (mesh.nodes[e[:, 0]] + mesh.nodes[e[:, 1]])
    on_axis = (mesh.nodes[e[:, 0], 0] == 0.0) & (mesh.nodes[e[:, 1], 0] == 0.0)
    pts[on_axis, 0] = 0.0
    return pts


def _corners_per_triangle(mesh):
    is_corner = np.zeros(mesh.n_nodes, dtype=bool)
    is_corner[mesh.corner_nodes] = True
    return is_corner[mesh.triangles].sum(axis=1)


def initial_triangulation(domain, max_edge=None, *, enforce_edge_bound=True):
    """Coarsest mesh T_0 of ``domain``.

    A constrained Delaunay triangulation of the polygon is refined uniformly
    until no triangle holds two corners and every edge is at most
    ``max_edge``.

    Parameters
    ----------
    max_edge : float, optional
        Edge-length bound. With ``enforce_edge_bound`` (default) it defaults
        to ``L/2`` and larger values are clamped to ``L/2`` with a warning.
        With ``enforce_edge_bound=False`` only the one-corner-per-triangle
        condition (and ``max_edge`` if given) is imposed, which gives much
        coarser starting meshes.
    """
    half_l = 0.5 * domain.separation_L
    if enforce_edge_bound:
        if max_edge is None:
            bound = half_l
        elif max_edge > half_l:
            warnings.warn(f"max_edge={max_edge:g} exceeds L/2={half_l:g}; clamped", stacklevel=2)
            bound = half_l
        else:
            bound = float(max_edge)
    else:
        bound = math.inf if max_edge is None else float(max_edge)
    if not bound > 0:
        raise MeshingFailed("max_edge must be positive")

    mesh = _polygon_mesh(domain)
    for _ in range(_MAX_INITIAL_REFINEMENTS + 1):
        if np.any(mesh.areas <= 0):
            raise MeshingFailed("degenerate triangle in initial mesh")
        ok_len = mesh.edge_lengths.max() <= bound * (1 + 1e-12)
        ok_q = _corners_per_triangle(mesh).max() <= 1
        if ok_len and ok_q:
            mesh.check_conforming()
            return mesh
        mesh = _red_refine(mesh, _midpoints(mesh), level=0, parent_map=None)
    raise MeshingFailed("initial mesh constraints not met after repeated refinement")


def kappa_refine(mesh, domain, plan):
    """One kappa-refinement of ``mesh`` following ``plan``."""
    mesh.check_conforming()
    if _corners_per_triangle(mesh).max() > 1:
        raise NonConformingInput("a triangle contains two corners of the domain")
    kap = np.zeros(mesh.n_nodes)
    for vi, k in plan.kappas.items():
        kap[mesh.corner_nodes[vi]] = k
    e = mesh.edges
    xa, xb = mesh.nodes[e[:, 0]], mesh.nodes[e[:, 1]]
    ka, kb = kap[e[:, 0]], kap[e[:, 1]]
    pts = 0.5 * (xa + xb)
    sel = ka > 0
    pts[sel] = xa[sel] + ka[sel, None] * (xb[sel] - xa[sel])
    sel = kb > 0
    pts[sel] = xb[sel] + kb[sel, None] * (xa[sel] - xb[sel])
    on_axis = (xa[:, 0] == 0.0) & (xb[:, 0] == 0.0)
    pts[on_axis, 0] = 0.0
    parent = np.repeat(np.arange(mesh.n_triangles, dtype=np.int64), 4)
    return _red_refine(mesh, pts, level=mesh.level + 1, parent_map=parent)


@dataclass(frozen=True, eq=False)
class MeshHierarchy:
    domain: object
    plan: GradingPlan
    meshes: tuple

    def __len__(self):
        return len(self.meshes)

    def __getitem__(self, j):
        return self.meshes[j]

    @property
    def finest(self):
        return self.meshes[-1]


def build_hierarchy(domain, plan, n_levels, max_edge=None, *, enforce_edge_bound=True):
    """Nested meshes ``T_0, ..., T_n`` with ``T_{j+1} = kappa(T_j)``."""
    if n_levels < 0:
        raise ValueError("n_levels must be >= 0")
    meshes = [initial_triangulation(domain, max_edge, enforce_edge_bound=enforce_edge_bound)]
    for _ in range(n_levels):
        meshes.append(kappa_refine(meshes[-1], domain, plan))
    return MeshHierarchy(domain=domain, plan=plan, meshes=tuple(meshes))


@dataclass
class GradingReport:
    """Per-level mesh statistics.

    ``incident_lengths[j][v]`` holds the sorted lengths of the mesh edges
    meeting corner ``v`` at level ``j``; ``min_angle[j]`` is the smallest
    triangle angle at level ``j``.
    """

    levels: list
    n_triangles: list
    min_angle: list
    incident_lengths: list

    def edge_ratios(self, vertex):
        """Ratios of incident edge lengths between consecutive levels."""
        out = []
        for j in range(1, len(self.levels)):
            out.append(self.incident_lengths[j][vertex] / self.incident_lengths[j - 1][vertex])
        return out


def grading_diagnostics(hierarchy):
    levels, ntri, min_angle, incident = [], [], [], []
    for mesh in hierarchy.meshes:
        levels.append(mesh.level)
        ntri.append(mesh.n_triangles)
        min_angle.append(float(mesh.angles().min()))
        per_vertex = {}
        e = mesh.edges
        for vi in hierarchy.plan.kappas:
            node = mesh.corner_nodes[vi]
            sel = (e[:, 0] == node) | (e[:, 1] == node)
            per_vertex[vi] = np.sort(mesh.edge_lengths[sel])
        incident.append(per_vertex)
    return GradingReport(levels, ntri, min_angle, incident)


# ------------------------------------------------------------------- export

_HEADER = """\
# axistokes mesh, line-oriented text
# sections: 'nodes N' then N lines 'index r z';
#           'triangles T' then T lines 'index a b c parent' (parent -1 at level 0);
#           'boundary B' then B lines 'index a b tag' (tag 0 = axis, 1 = wall);
#           'corners C' then one line of node indices
"""


def write_mesh(mesh, path):
    """Write ``mesh`` in the plain-text format described in the header."""
    path = Path(path)
    parent = mesh.parent_map if mesh.parent_map is not None else np.full(mesh.n_triangles, -1)
    with path.open("w") as fh:
        fh.write(_HEADER)
        fh.write(f"level {mesh.level}\n")
        fh.write(f"nodes {mesh.n_nodes}\n")
        for i, (r, z) in enumerate(mesh.nodes):
            fh.write(f"{i} {r:.17g} {z:.17g}\n")
        fh.write(f"triangles {mesh.n_triangles}\n")
        for i, (t, p) in enumerate(zip(mesh.triangles, parent)):
            fh.write(f"{i} {t[0]} {t[1]} {t[2]} {p}\n")
        fh.write(f"boundary {len(mesh.boundary_edges)}\n")
        for i, (e, tag) in enumerate(zip(mesh.boundary_edges, mesh.boundary_tags)):
            fh.write(f"{i} {e[0]} {e[1]} {tag}\n")
        fh.write(f"corners {len(mesh.corner_nodes)}\n")
        fh.write(" ".join(str(c) for c in mesh.corner_nodes) + "\n")
    return path


def read_mesh(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    it = iter(lines)
    level = int(next(it).split()[1])
    n = int(next(it).split()[1])
    nodes = np.array([[float(x) for x in next(it).split()[1:]] for _ in range(n)])
    t = int(next(it).split()[1])
    tri = np.array([[int(x) for x in next(it).split()[1:]] for _ in range(t)], dtype=np.int64)
    b = int(next(it).split()[1])
    bd = np.array([[int(x) for x in next(it).split()[1:]] for _ in range(b)], dtype=np.int64)
    next(it)
    corners = np.array([int(x) for x in next(it).split()], dtype=np.int64)
    parent = tri[:, 3] if level > 0 else None
    return TriMesh(nodes=nodes, triangles=tri[:, :3].copy(), boundary_edges=bd[:, :2].copy(),
                   boundary_tags=bd[:, 2].astype(np.int8), level=level,
                   parent_map=None if parent is None else parent.copy(), corner_nodes=corners)


def write_mesh_csv(mesh, prefix):
    """Write ``<prefix>_nodes.csv`` and ``<prefix>_triangles.csv``."""
    prefix = Path(prefix)
    np.savetxt(f"{prefix}_nodes.csv",
               np.column_stack([np.arange(mesh.n_nodes), mesh.nodes]),
               delimiter=",", header="index,r,z", comments="", fmt=["%d", "%.17g", "%.17g"])
    np.savetxt(f"{prefix}_triangles.csv",
               np.column_stack([np.arange(mesh.n_triangles), mesh.triangles]),
               delimiter=",", header="index,a,b,c", comments="", fmt="%d")
