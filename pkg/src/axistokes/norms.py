"""Weighted norms, exact prolongation between nested levels and rate tables.

All integrals carry the cylindrical measure ``r dr dz`` and are evaluated with
the interior-point triangle rules, so ``1/r`` weights are never evaluated on
the axis.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import LevelMismatch, NotNested, RegionOutsideNeighborhood, UnsupportedSpec
from .quadrature import quadrature_rule
from .spaces import DiscreteField, inverse_jacobians, jacobians

__all__ = [
    "NormKind",
    "NormSpec",
    "Poly2D",
    "FunctionField",
    "ErrorField",
    "theta",
    "weighted_norm",
    "inv_r_norm",
    "prolong",
    "prolong_solution",
    "RateTable",
    "level_errors",
    "consecutive_difference",
    "rates_with_floor",
    "convergence_rates",
    "dilation_scaling_check",
]


class NormKind(str, Enum):
    L2_1 = "L2_1"
    H1_1 = "H1_1"
    H1_PLUS = "H1_plus"
    H1_MINUS = "H1_minus"
    KMU1_SEMINORM = "Kmu1_seminorm"
    KMU1 = "Kmu1"


_DEFAULT_ORDER = {NormKind.L2_1: 0, NormKind.H1_1: 1, NormKind.H1_PLUS: 1,
                  NormKind.H1_MINUS: 1, NormKind.KMU1_SEMINORM: 1, NormKind.KMU1: 1}


@dataclass(frozen=True, eq=False)
class NormSpec:
    """Which norm to evaluate.

    ``vertices`` and ``radius`` define the vertex distance weight used by the
    K-type norms; see :func:`theta`.
    """

    kind: NormKind
    m: int | None = None
    mu: float = 0.0
    vertices: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        try:
            kind = NormKind(self.kind)
        except ValueError:
            raise UnsupportedSpec(f"unknown norm kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        m = _DEFAULT_ORDER[kind] if self.m is None else int(self.m)
        if m < 0:
            raise UnsupportedSpec(f"order must be >= 0, got {m}")
        if kind is NormKind.L2_1 and m != 0:
            raise UnsupportedSpec("L2_1 has order 0")
        object.__setattr__(self, "m", m)
        if kind in (NormKind.KMU1, NormKind.KMU1_SEMINORM):
            if self.vertices is None or self.radius is None or not self.radius > 0:
                raise UnsupportedSpec("K-type norms need the vertex set and a positive radius")
            object.__setattr__(self, "vertices", np.atleast_2d(np.asarray(self.vertices, float)))

    @classmethod
    def for_domain(cls, domain, kind, m=None, mu=0.0):
        """Spec whose vertex weight uses the corners of ``domain`` and radius ``L/2``."""
        verts = domain.vertices[list(domain.corners)]
        return cls(kind=kind, m=m, mu=mu, vertices=verts, radius=0.5 * domain.separation_L)


def theta(points, vertices, radius):
    """Distance to the nearest vertex, capped at ``radius``.

    Inside each ball ``B(Q_i, radius)`` this is ``|x - Q_i|``; outside all of
    them it is the constant ``radius``.
    """
    pts = np.asarray(points, dtype=float)
    d = np.full(pts.shape[:-1], np.inf)
    for q in np.atleast_2d(vertices):
        d = np.minimum(d, np.hypot(pts[..., 0] - q[0], pts[..., 1] - q[1]))
    return np.minimum(d, radius)


class Poly2D:
    """Polynomial ``sum c[a, b] r^a z^b`` with exact derivatives."""

    def __init__(self, coeffs):
        self.coeffs = {tuple(map(int, k)): float(v) for k, v in dict(coeffs).items() if v != 0}

    @classmethod
    def random(cls, degree, rng=None, scale=1.0):
        rng = np.random.default_rng(rng)
        return cls({(a, s - a): scale * rng.standard_normal()
                    for s in range(degree + 1) for a in range(s + 1)})

    @property
    def degree(self):
        return max((a + b for a, b in self.coeffs), default=0)

    def __call__(self, r, z):
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        out = np.zeros(np.broadcast(r, z).shape)
        for (a, b), c in self.coeffs.items():
            out = out + c * r ** a * z ** b
        return out

    def derivative(self, i, j):
        out = {}
        for (a, b), c in self.coeffs.items():
            if a >= i and b >= j:
                f = math.perm(a, i) * math.perm(b, j)
                out[(a - i, b - j)] = out.get((a - i, b - j), 0.0) + c * f
        return Poly2D(out)

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return Poly2D(out)

    def __mul__(self, other):
        if isinstance(other, Poly2D):
            out = {}
            for (a, b), c in self.coeffs.items():
                for (d, e), g in other.coeffs.items():
                    out[(a + d, b + e)] = out.get((a + d, b + e), 0.0) + c * g
            return Poly2D(out)
        return Poly2D({k: other * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__


class FunctionField:
    """A callable ``f(r, z)`` together with callables for its partial derivatives.

    ``derivatives`` maps ``(i, j)`` to a callable for ``d_r^i d_z^j f``.
    """

    def __init__(self, func, derivatives=None):
        self.func = func
        self.derivatives = {(0, 0): func, **dict(derivatives or {})}

    def __call__(self, r, z):
        return self.func(r, z)

    def derivative(self, i, j):
        try:
            return FunctionField(self.derivatives[(i, j)])
        except KeyError:
            raise UnsupportedSpec(f"derivative {(i, j)} not supplied") from None


class ErrorField:
    """``exact - discrete`` for norms of interpolation or discretization errors."""

    def __init__(self, exact, discrete):
        self.exact = exact
        self.discrete = discrete


def _cell_rules(mesh, quad_degree, cells):
    axis = mesh.axis_triangles[cells]
    return [(cells[~axis], quadrature_rule(quad_degree)),
            (cells[axis], quadrature_rule(min(quad_degree + 2, 40)))]


def _discrete_derivatives(field, cells, xy, orders):
    """Physical partial derivatives of a discrete field at reference points."""
    space = field.space
    el = space.element
    coeffs = field.coeffs[space.cell_dofs[cells]]  # (nc, nb)
    need = max((i + j for i, j in orders), default=0)
    out = {}
    if (0, 0) in orders:
        out[(0, 0)] = coeffs @ el.values(xy).T
    if need == 0:
        return out
    G = inverse_jacobians(space.mesh)[cells]  # (nc, 2, 2)
    ref = {}
    for s in range(1, need + 1):
        for i in range(s + 1):
            ref[(i, s - i)] = coeffs @ el.derivative(xy, i, s - i).T  # (nc, nq)
    for (i, j) in orders:
        if i + j == 0:
            continue
        # d/dx_e = sum_d G[d, e] d/dxi_d ; expand (d_r)^i (d_z)^j
        op = {(0, 0): np.ones(len(cells))}
        for e in [0] * i + [1] * j:
            new = {}
            for (a, b), c in op.items():
                for d, step in ((0, (1, 0)), (1, (0, 1))):
                    key = (a + step[0], b + step[1])
                    new[key] = new.get(key, 0.0) + c * G[:, d, e]
            op = new
        out[(i, j)] = sum(c[:, None] * ref[k] for k, c in op.items())
    return out


def _field_derivatives(field, mesh, cells, rule, orders):
    if isinstance(field, ErrorField):
        a = _field_derivatives(field.exact, mesh, cells, rule, orders)
        b = _field_derivatives(field.discrete, mesh, cells, rule, orders)
        return {k: a[k] - b[k] for k in a}
    if isinstance(field, DiscreteField):
        if field.space.mesh is not mesh and not (
                field.space.mesh.n_triangles == mesh.n_triangles
                and np.array_equal(field.space.mesh.triangles, mesh.triangles)):
            raise ValueError("discrete field lives on a different mesh")
        return _discrete_derivatives(field, cells, rule.xy, orders)
    x = np.einsum("qk,ckd->cqd", rule.points, mesh.nodes[mesh.triangles[cells]])
    out = {}
    for (i, j) in orders:
        if (i, j) == (0, 0):
            f = field
        elif hasattr(field, "derivative"):
            f = field.derivative(i, j)
        else:
            raise UnsupportedSpec("plain callables only support order-0 norms; "
                                  "wrap them in FunctionField or Poly2D")
        out[(i, j)] = np.broadcast_to(np.asarray(f(x[..., 0], x[..., 1]), float), x.shape[:-1])
    return out


def _terms(spec):
    """List of ``(i, j, theta_power, r_power)`` integrand terms ``theta^tp r^rp (d^ij v)^2``."""
    m, kind = spec.m, spec.kind
    terms = []
    if kind in (NormKind.L2_1, NormKind.H1_1, NormKind.H1_PLUS, NormKind.H1_MINUS):
        for s in range(m + 1):
            for i in range(s + 1):
                terms.append((i, s - i, 0.0, 1))
        extra = (kind is NormKind.H1_PLUS and m >= 2 and m % 2 == 0) or \
                (kind is NormKind.H1_MINUS and m % 2 == 1)
        if extra:
            terms.append((m - 1, 0, 0.0, -1))
    else:
        levels = [m] if kind is NormKind.KMU1_SEMINORM else range(m + 1)
        for s in levels:
            for i in range(s + 1):
                terms.append((i, s - i, 2.0 * (s - spec.mu), 1))
    return terms


def _squared(field, mesh, terms, quad_degree, cells, spec=None, vertices=None, radius=None):
    cells = np.arange(mesh.n_triangles) if cells is None else np.asarray(cells)
    detj = np.abs(np.linalg.det(jacobians(mesh)))
    orders = sorted({(i, j) for i, j, _, _ in terms})
    total = 0.0
    for cs, rule in _cell_rules(mesh, quad_degree, cells):
        if len(cs) == 0:
            continue
        x = np.einsum("qk,ckd->cqd", rule.points, mesh.nodes[mesh.triangles[cs]])
        r = x[..., 0]
        w = rule.weights[None, :] * detj[cs, None]
        der = _field_derivatives(field, mesh, cs, rule, orders)
        th = None
        for i, j, tp, rp in terms:
            wt = w * (r if rp == 1 else 1.0 / r)
            if tp != 0.0:
                if th is None:
                    th = theta(x, vertices, radius)
                wt = wt * th ** tp
            total += float(np.sum(wt * der[(i, j)] ** 2))
    return total


def _default_degree(field, quad_degree):
    if quad_degree is not None:
        return int(quad_degree)
    if isinstance(field, DiscreteField):
        return 2 * field.space.degree + 4
    if isinstance(field, ErrorField):
        return max(_default_degree(field.exact, None), _default_degree(field.discrete, None))
    if isinstance(field, Poly2D):
        return min(2 * field.degree + 4, 38)
    return 12


def weighted_norm(field, mesh, spec, quad_degree=None, cells=None, squared=False):
    """Weighted norm of ``field`` over ``mesh`` (or the listed ``cells``).

    Parameters
    ----------
    field : DiscreteField, Poly2D, FunctionField or callable
        Plain callables are accepted for order-0 norms only.
    mesh : TriMesh
    spec : NormSpec
    quad_degree : int, optional
        Exactness degree of the triangle rule (two more on axis triangles).
    """
    if not isinstance(spec, NormSpec):
        raise UnsupportedSpec(f"expected a NormSpec, got {type(spec).__name__}")
    qd = _default_degree(field, quad_degree)
    val = _squared(field, mesh, _terms(spec), qd, cells, vertices=spec.vertices, radius=spec.radius)
    return val if squared else math.sqrt(max(val, 0.0))


def inv_r_norm(field, mesh, quad_degree=None, cells=None):
    """``||r^-1 v||_{L^2_1} = (int v^2 / r dr dz)^{1/2}``."""
    qd = _default_degree(field, quad_degree)
    return math.sqrt(_squared(field, mesh, [(0, 0, 0.0, -1)], qd, cells))


# ---------------------------------------------------------------- prolongation

def _ancestors(coarse_mesh, fine_mesh):
    d = fine_mesh.level - coarse_mesh.level
    if d < 0 or fine_mesh.n_triangles != coarse_mesh.n_triangles * 4 ** d:
        raise NotNested(f"mesh with {fine_mesh.n_triangles} triangles at level {fine_mesh.level} "
                        f"does not refine {coarse_mesh.n_triangles} triangles at level {coarse_mesh.level}")
    if d > 0 and (fine_mesh.parent_map is None
                  or not np.array_equal(fine_mesh.parent_map, np.arange(fine_mesh.n_triangles) // 4)):
        raise NotNested("fine mesh has no compatible parent map")
    anc = np.arange(fine_mesh.n_triangles) // 4 ** d
    # geometric confirmation: every fine vertex sits inside its ancestor
    p0 = coarse_mesh.nodes[coarse_mesh.triangles[anc, 0]]
    G = inverse_jacobians(coarse_mesh)[anc]
    scale = np.sqrt(coarse_mesh.areas[anc])
    for k in range(3):
        xi = np.einsum("tij,tj->ti", G, fine_mesh.nodes[fine_mesh.triangles[:, k]] - p0)
        lam = np.column_stack([1 - xi.sum(1), xi])
        if np.any(lam.min(axis=1) < -1e-9 * np.maximum(1.0, 1.0 / scale)):
            raise NotNested("fine triangles are not contained in their ancestors")
    return anc


def prolong(coarse, fine_space):
    """Coefficients on ``fine_space`` of the coarse discrete field ``coarse``.

    Exact: the fine mesh refines the coarse one and both spaces have the same
    degree, so the coarse piecewise polynomial is reproduced pointwise.
    """
    cspace = coarse.space
    if cspace.degree != fine_space.degree:
        raise NotNested("spaces have different polynomial degrees")
    if fine_space.mesh is cspace.mesh:
        return coarse.coeffs.copy()
    anc = _ancestors(cspace.mesh, fine_space.mesh)
    fm = fine_space.mesh
    el = fine_space.element
    # physical coordinates of each fine cell's local nodes
    x = np.einsum("bk,tkd->tbd", el.nodes, fm.nodes[fm.triangles])
    p0 = cspace.mesh.nodes[cspace.mesh.triangles[anc, 0]]
    G = inverse_jacobians(cspace.mesh)[anc]
    xi = np.einsum("tij,tbj->tbi", G, x - p0[:, None, :])
    nt, nb = xi.shape[:2]
    vals = cspace.element.values(xi.reshape(-1, 2)).reshape(nt, nb, -1)
    local = np.einsum("tbc,tc->tb", vals, coarse.coeffs[cspace.cell_dofs[anc]])
    out = np.empty(fine_space.n_dofs)
    out[fine_space.cell_dofs.ravel()] = local.ravel()
    return out


def prolong_solution(solution, fine_space):
    """Prolong every component of a :class:`FieldSolution` onto a Taylor-Hood space."""
    ur = prolong(solution.velocity_r(), fine_space.velocity)
    uz = prolong(solution.velocity_z(), fine_space.velocity)
    p = prolong(solution.pressure(), fine_space.pressure)
    return ur, uz, p


# ------------------------------------------------------------------ rate table

_MD_HEADER = ["level", "‖u_j − u_{j−1}‖", "rate_u", "‖p_j − p_{j−1}‖", "rate_p"]
_CSV_HEADER = ["level", "error_u", "rate_u", "error_p", "rate_p"]


def convergence_rates(errors, floor=0.0):
    """``log2(e_{j-1} / e_j)``; NaN for the first entry and wherever an error is <= ``floor``."""
    e = np.asarray(errors, dtype=float)
    rates = np.full(len(e), np.nan)
    for j in range(1, len(e)):
        a, b = e[j - 1], e[j]
        if np.isfinite(a) and np.isfinite(b) and a > floor and b > floor:
            rates[j] = math.log2(a) - math.log2(b)
    return rates


@dataclass(eq=False)
class RateTable:
    """Differences between consecutive levels and the observed rates.

    Row ``j`` holds ``||u_j - u_{j-1}||``, ``||p_j - p_{j-1}||`` and the rates
    computed from rows ``j-1`` and ``j``.
    """

    levels: list = field(default_factory=list)
    error_u: list = field(default_factory=list)
    rate_u: list = field(default_factory=list)
    error_p: list = field(default_factory=list)
    rate_p: list = field(default_factory=list)

    def __len__(self):
        return len(self.levels)

    def rows(self):
        return list(zip(self.levels, self.error_u, self.rate_u, self.error_p, self.rate_p))

    def __eq__(self, other):
        if not isinstance(other, RateTable) or len(self) != len(other):
            return NotImplemented if not isinstance(other, RateTable) else False
        a = np.array([r[1:] for r in self.rows()], dtype=float).reshape(-1, 4)
        b = np.array([r[1:] for r in other.rows()], dtype=float).reshape(-1, 4)
        return list(self.levels) == list(other.levels) and np.array_equal(a, b, equal_nan=True)

    # -- serialization
    def to_markdown(self, title=None):
        def num(v):
            return "x" if not np.isfinite(v) else f"{v:.8E}"

        def rate(v):
            return "x" if not np.isfinite(v) else f"{v:.3f}"

        lines = []
        if title:
            lines += [f"### {title}", ""]
        lines.append("| " + " | ".join(_MD_HEADER) + " |")
        lines.append("|" + "|".join(["---"] * len(_MD_HEADER)) + "|")
        for lv, eu, ru, ep, rp in self.rows():
            lines.append(f"| {lv} | {num(eu)} | {rate(ru)} | {num(ep)} | {rate(rp)} |")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_markdown(cls, text):
        t = cls()
        for line in text.splitlines():
            cells = [c.strip() for c in line.strip().strip("|").split("|")]
            if len(cells) != 5 or not cells[0].isdigit():
                continue
            vals = [math.nan if c == "x" else float(c) for c in cells[1:]]
            t.levels.append(int(cells[0]))
            for lst, v in zip((t.error_u, t.rate_u, t.error_p, t.rate_p), vals):
                lst.append(v)
        return t

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_CSV_HEADER)
        for lv, *vals in self.rows():
            w.writerow([lv] + [repr(float(v)) for v in vals])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        t = cls()
        rows = list(csv.reader(io.StringIO(text)))
        for row in rows[1:]:
            if not row:
                continue
            t.levels.append(int(row[0]))
            for lst, v in zip((t.error_u, t.rate_u, t.error_p, t.rate_p), row[1:]):
                lst.append(float(v))
        return t

    def write(self, path, fmt="markdown"):
        path = Path(path)
        path.write_text(self.to_markdown() if fmt == "markdown" else self.to_csv())
        return path


def consecutive_difference(coarse, fine, quad_degree=None, with_norms=False):
    """Norms of ``fine - prolong(coarse)``.

    Returns ``(error_u, error_p)`` with the velocity measured in
    ``H^1_- x H^1_+`` and the pressure in ``L^2_1``; with ``with_norms`` the
    same norms of ``fine`` itself are appended.
    """
    fs = fine.space
    mesh = fs.mesh
    ur, uz, p = prolong_solution(coarse, fs)
    h1m = NormSpec(NormKind.H1_MINUS)
    h1p = NormSpec(NormKind.H1_PLUS)
    l2 = NormSpec(NormKind.L2_1)

    def vel(a, b):
        return math.sqrt(weighted_norm(DiscreteField(fs.velocity, a), mesh, h1m, quad_degree, squared=True)
                         + weighted_norm(DiscreteField(fs.velocity, b), mesh, h1p, quad_degree, squared=True))

    eu = vel(fine.ur - ur, fine.uz - uz)
    ep = weighted_norm(DiscreteField(fs.pressure, fine.p - p), mesh, l2, quad_degree)
    if not with_norms:
        return eu, ep
    return eu, ep, vel(fine.ur, fine.uz), weighted_norm(fine.pressure(), mesh, l2, quad_degree)


def level_errors(hierarchy, solutions, rel_floor=0.0, quad_degree=None):
    """Consecutive-level differences and rates.

    Parameters
    ----------
    hierarchy : MeshHierarchy or sequence of TriMesh
    solutions : sequence of FieldSolution, one per level, in order
    rel_floor : float
        Differences at or below ``rel_floor`` times the norm of the finer
        solution are treated as round-off and get a NaN rate.
    """
    meshes = list(getattr(hierarchy, "meshes", hierarchy))
    if len(solutions) != len(meshes):
        raise LevelMismatch(f"{len(solutions)} solutions for {len(meshes)} levels")
    for j, (m, s) in enumerate(zip(meshes, solutions)):
        if s.space.mesh is not m:
            raise LevelMismatch(f"solution {j} is not on hierarchy level {j}")
    table = RateTable()
    floors_u, floors_p = [], []
    for j in range(1, len(solutions)):
        eu, ep, nu, npn = consecutive_difference(solutions[j - 1], solutions[j], quad_degree,
                                                 with_norms=True)
        table.levels.append(j)
        table.error_u.append(eu)
        table.error_p.append(ep)
        floors_u.append(rel_floor * nu)
        floors_p.append(rel_floor * npn)
    table.rate_u = rates_with_floor(table.error_u, floors_u)
    table.rate_p = rates_with_floor(table.error_p, floors_p)
    return table


def rates_with_floor(errors, floors=None):
    """Rates of :func:`convergence_rates` with per-entry round-off floors."""
    e = np.asarray(errors, dtype=float)
    if floors is not None and len(floors):
        e = np.where(e <= np.asarray(floors), 0.0, e)
    return [float(v) for v in convergence_rates(e)]


# -------------------------------------------------------------- dilation check

def _point_in_polygon(pts, poly, tol):
    """Points inside or within ``tol`` of the closed polygon."""
    pts = np.atleast_2d(pts)
    inside = np.zeros(len(pts), dtype=bool)
    n = len(poly)
    near = np.zeros(len(pts), dtype=bool)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        ab = b - a
        t = np.clip(((pts - a) @ ab) / (ab @ ab), 0.0, 1.0)
        near |= np.hypot(*(pts - (a + t[:, None] * ab)).T) <= tol
        cond = (a[1] > pts[:, 1]) != (b[1] > pts[:, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = a[0] + (pts[:, 1] - a[1]) * ab[0] / ab[1]
        inside ^= cond & (pts[:, 0] < xint)
    return inside | near


def _region_mesh(region):
    from .mesh import TriMesh

    if isinstance(region, TriMesh):
        return region
    tris = np.asarray(region, dtype=float)
    if tris.ndim != 3 or tris.shape[1:] != (3, 2):
        raise ValueError("region must be a TriMesh or an array of triangles (n, 3, 2)")
    nodes = tris.reshape(-1, 2)
    t = np.arange(len(nodes)).reshape(-1, 3)
    # orient counterclockwise
    p = nodes[t]
    cross = ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
             - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
    t[cross < 0] = t[cross < 0][:, [0, 2, 1]]
    return TriMesh(nodes=nodes, triangles=t, boundary_edges=np.zeros((0, 2), dtype=np.int64),
                   boundary_tags=np.zeros(0, dtype=np.int64))


def _dilate_field(v, q, lam):
    """``v_lam(x) = v(Q + lam (x - Q))`` together with its derivatives."""
    def make(i, j):
        f = v if (i, j) == (0, 0) else v.derivative(i, j)
        return lambda r, z: lam ** (i + j) * f(q[0] + lam * (r - q[0]), q[1] + lam * (z - q[1]))

    class _Dilated:
        def __call__(self, r, z):
            return make(0, 0)(r, z)

        def derivative(self, i, j):
            return FunctionField(make(i, j))

    return _Dilated()


def dilation_scaling_check(v, region, lam, m, a, domain, vertex, weight="K", quad_degree=None):
    """Norms of ``v`` on ``G`` and of its dilation ``v_lam`` on ``G_lam``.

    ``G_lam = Q + (G - Q) / lam`` and ``v_lam(x) = v(Q + lam (x - Q))`` with
    ``Q`` the domain vertex ``vertex``. Returns ``(norm_on_G, norm_on_G_lam)``.

    Parameters
    ----------
    v : Poly2D or FunctionField
    region : TriMesh or array (n, 3, 2)
        Triangulation of ``G``.
    lam : float in (0, 1]
    m : int
        Order of the K-norm.
    a : float
        Weight index of the K-norm.
    weight : {"K", "inv_r"}
        ``"K"`` compares ``K^m_{a,1}`` norms; ``"inv_r"`` compares ``||r^-1 v||_{L^2_1}``.

    Raises
    ------
    RegionOutsideNeighborhood
        If ``G`` or ``G_lam`` leaves ``Omega`` intersected with ``B(Q, L/2)``.
    """
    if not 0 < lam <= 1:
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    mesh = _region_mesh(region)
    q = np.asarray(domain.vertices[vertex], dtype=float)
    R = 0.5 * domain.separation_L
    scaled = q + (mesh.nodes - q) / lam
    tol = 1e-12 * domain.diameter
    for pts in (mesh.nodes, scaled):
        if np.any(np.hypot(*(pts - q).T) > R + tol) or not np.all(
                _point_in_polygon(pts, domain.vertices, tol)):
            raise RegionOutsideNeighborhood(
                f"region (or its dilation by 1/{lam}) leaves the neighborhood of vertex {vertex}")
    from .mesh import TriMesh

    mesh_l = TriMesh(nodes=scaled, triangles=mesh.triangles.copy(),
                     boundary_edges=mesh.boundary_edges.copy(), boundary_tags=mesh.boundary_tags.copy())
    vl = _dilate_field(v, q, lam)
    qd = quad_degree
    if qd is None:
        qd = min(2 * getattr(v, "degree", 5) + 6, 38)
    if weight == "K":
        spec = NormSpec.for_domain(domain, NormKind.KMU1, m=m, mu=a)
        return weighted_norm(v, mesh, spec, qd), weighted_norm(vl, mesh_l, spec, qd)
    if weight == "inv_r":
        return inv_r_norm(v, mesh, qd), inv_r_norm(vl, mesh_l, qd)
    raise UnsupportedSpec(f"unknown weight {weight!r}")
