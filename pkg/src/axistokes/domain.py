"""Polygonal meridian domains in the (r, z) half-plane.

A domain is a simple polygon with ``r >= 0`` everywhere. Boundary edges lying
on the symmetry axis ``r = 0`` form the axis part of the boundary; every
other edge belongs to the wall part, where both velocity components vanish.

Built-in domains are available through :func:`builtin_domain`::

    >>> dom = builtin_domain("unit_square")
    >>> dom.gamma0_edges
    (3,)
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyAxisContact, NegativeRadius, NonSimplePolygon

__all__ = [
    "VertexKind",
    "MeridianDomain",
    "build_domain",
    "interior_angle",
    "builtin_domain",
    "load_domain",
    "BUILTIN_NAMES",
]

#: interior angles closer than this to pi are treated as straight (not corners)
STRAIGHT_ANGLE_TOL = 1e-10


class VertexKind(str, enum.Enum):
    ON_AXIS = "on_axis"
    OFF_AXIS = "off_axis"


@dataclass(frozen=True, eq=False)
class MeridianDomain:
    """Validated counterclockwise polygon with axis/wall boundary split.

    Edge ``i`` joins vertex ``i`` to vertex ``(i + 1) % n``.
    """

    vertices: np.ndarray
    gamma0_edges: tuple
    vertex_kinds: tuple
    interior_angles: np.ndarray
    separation_L: float
    axis_tolerance: float
    name: str = "custom"
    marked_vertex: int | None = None

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def edges(self):
        n = self.n_vertices
        return [(i, (i + 1) % n) for i in range(n)]

    @property
    def corners(self):
        """Indices of the vertex set Q: vertices whose angle is not straight."""
        return tuple(
            i for i, a in enumerate(self.interior_angles)
            if abs(a - math.pi) > STRAIGHT_ANGLE_TOL
        )

    @property
    def diameter(self):
        v = self.vertices
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    def is_on_axis(self, i):
        return self.vertex_kinds[i] is VertexKind.ON_AXIS

    def to_json(self):
        return {
            "vertices": self.vertices.tolist(),
            "axis_tolerance": self.axis_tolerance,
        }


def _segments_intersect(p1, p2, q1, q2, eps):
    """Closed-segment intersection test (touching counts)."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c):
        return (min(a[0], b[0]) - eps <= c[0] <= max(a[0], b[0]) + eps
                and min(a[1], b[1]) - eps <= c[1] <= max(a[1], b[1]) + eps)

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
       ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True
    if abs(d1) <= eps and on_segment(q1, q2, p1):
        return True
    if abs(d2) <= eps and on_segment(q1, q2, p2):
        return True
    if abs(d3) <= eps and on_segment(p1, p2, q1):
        return True
    if abs(d4) <= eps and on_segment(p1, p2, q2):
        return True
    return False


def _point_segment_distance(p, a, b):
    ab = b - a
    t = np.dot(p - a, ab) / np.dot(ab, ab)
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - (a + t * ab)))


def _angles_ccw(v):
    n = len(v)
    angles = np.empty(n)
    for i in range(n):
        e_in = v[i] - v[i - 1]
        e_out = v[(i + 1) % n] - v[i]
        turn = math.atan2(e_in[0] * e_out[1] - e_in[1] * e_out[0],
                          float(np.dot(e_in, e_out)))
        angles[i] = math.pi - turn
    return angles


def build_domain(vertices, axis_tolerance=None, *, allow_no_axis=False,
                 name="custom", marked_vertex=None):
    """Validate a polygon and classify its boundary.

    Parameters
    ----------
    vertices : array_like, shape (n, 2)
        Polygon vertices ``(r, z)``; either orientation is accepted and the
        result is always counterclockwise.
    axis_tolerance : float, optional
        Radii within this distance of zero are snapped to exactly zero.
        Defaults to ``1e-12`` times the polygon diameter.
    allow_no_axis : bool
        Accept polygons without an edge on the axis.

    Returns
    -------
    MeridianDomain
    """
    v = np.array(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise NonSimplePolygon("need at least 3 vertices given as (r, z) pairs")
    diam = float(np.sqrt(((v[:, None] - v[None]) ** 2).sum(-1)).max())
    if diam == 0.0:
        raise NonSimplePolygon("all vertices coincide")
    tol = 1e-12 * diam if axis_tolerance is None else float(axis_tolerance)
    if np.any(v[:, 0] < -tol):
        raise NegativeRadius(f"vertex with r < -{tol:g}: min r = {v[:, 0].min()}")
    v[np.abs(v[:, 0]) <= tol, 0] = 0.0

    n = len(v)
    area2 = float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))
    if area2 == 0.0:
        raise NonSimplePolygon("polygon has zero area")
    if area2 < 0:
        v = v[::-1].copy()
        if marked_vertex is not None:
            marked_vertex = n - 1 - marked_vertex

    eps = 1e-13 * diam * diam
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        if np.allclose(a, b, rtol=0, atol=1e-14 * diam):
            raise NonSimplePolygon(f"repeated vertex {i}")
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_intersect(a, b, v[j], v[(j + 1) % n], eps):
                raise NonSimplePolygon(f"edges {i} and {j} intersect")

    angles = _angles_ccw(v)
    if np.any(angles <= 0) or np.any(angles >= 2 * math.pi):
        raise NonSimplePolygon("degenerate interior angle")

    gamma0 = tuple(i for i in range(n) if v[i, 0] == 0.0 and v[(i + 1) % n, 0] == 0.0)
    if not gamma0 and not allow_no_axis:
        raise EmptyAxisContact("no boundary edge lies on r = 0")

    sep = math.inf
    for i in range(n):
        for j in range(n):
            if j == i or (j + 1) % n == i:
                continue
            sep = min(sep, _point_segment_distance(v[i], v[j], v[(j + 1) % n]))
    if not sep > 0:
        raise NonSimplePolygon("vertex touches a disjoint edge")

    kinds = tuple(VertexKind.ON_AXIS if r == 0.0 else VertexKind.OFF_AXIS for r in v[:, 0])
    v.setflags(write=False)
    angles.setflags(write=False)
    return MeridianDomain(
        vertices=v, gamma0_edges=gamma0, vertex_kinds=kinds,
        interior_angles=angles, separation_L=float(sep), axis_tolerance=tol,
        name=name, marked_vertex=marked_vertex,
    )


def interior_angle(domain, vertex_index):
    """Interior angle (radians) of ``domain`` at ``vertex_index``."""
    if not 0 <= vertex_index < domain.n_vertices:
        raise IndexError(f"vertex index {vertex_index} out of range")
    return float(domain.interior_angles[vertex_index])


def _walk(start, headings, lengths):
    pts = [np.asarray(start, dtype=float)]
    for h, ell in zip(headings, lengths):
        pts.append(pts[-1] + ell * np.array([math.cos(h), math.sin(h)]))
    return pts


def _omega1_vertices():
    # pentagon: axis corners at (0,0), (0,1); off-axis reentrant corner Q=(1/2,1)
    # with angle 1.05*pi; the two remaining corners share 0.95*pi.
    pi = math.pi
    q = np.array([0.5, 1.0])
    d = np.array([0.0, 1.0])
    h_cq = 1.05 * pi           # heading of edge C -> Q
    h_bc = 0.525 * pi          # heading of edge B -> C
    c = q - 0.5 * np.array([math.cos(h_cq), math.sin(h_cq)])
    ell = c[1] / math.sin(h_bc)
    b = c - ell * np.array([math.cos(h_bc), math.sin(h_bc)])
    b[1] = 0.0
    return [(0.0, 0.0), tuple(b), tuple(c), tuple(q), tuple(d)], 3


def _omega2_vertices():
    # quadrilateral: on-axis corner Q=(0,0) with angle 0.75*pi, off-axis
    # corners of 0.375*pi, top axis corner of 0.5*pi.
    pi = math.pi
    q, b, c = _walk((0.0, 0.0), [1.75 * pi, 0.375 * pi], [1.0, 2.0])
    return [tuple(q), tuple(b), tuple(c), (0.0, float(c[1]))], 0


def _l_shape_vertices():
    return [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)], 3


BUILTIN_NAMES = ("unit_square", "omega1", "omega2", "l_shape")


def builtin_domain(name):
    """Return one of the built-in domains by name.

    ``omega1`` has an off-axis reentrant corner of angle ``1.05*pi``
    (``marked_vertex``), all other angles at most ``pi/2``. ``omega2`` has an
    on-axis corner of angle ``0.75*pi``, all other angles at most ``pi/2``.
    """
    if name == "unit_square":
        verts, marked = [(0, 0), (1, 0), (1, 1), (0, 1)], None
    elif name == "omega1":
        verts, marked = _omega1_vertices()
    elif name == "omega2":
        verts, marked = _omega2_vertices()
    elif name == "l_shape":
        verts, marked = _l_shape_vertices()
    else:
        raise KeyError(f"unknown built-in domain {name!r}; choose from {BUILTIN_NAMES}")
    return build_domain(verts, name=name, marked_vertex=marked)


def load_domain(spec):
    """Resolve a built-in name or read a JSON domain file.

    The file holds ``{"vertices": [[r, z], ...], "axis_tolerance": tol}``
    with ``axis_tolerance`` optional.
    """
    if isinstance(spec, MeridianDomain):
        return spec
    if str(spec) in BUILTIN_NAMES:
        return builtin_domain(str(spec))
    path = Path(spec)
    data = json.loads(path.read_text())
    return build_domain(data["vertices"], data.get("axis_tolerance"),
                        allow_no_axis=bool(data.get("allow_no_axis", False)),
                        name=path.stem, marked_vertex=data.get("marked_vertex"))
