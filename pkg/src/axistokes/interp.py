"""Quasi-interpolation operators built from local weighted L2 projections.

Every degree-of-freedom node ``x_i`` of a degree-``k`` Lagrange space is
assigned a region -- a boundary edge ``e(x_i)`` or a triangle ``T(x_i)`` --
and its coefficient is the value at ``x_i`` of the local projection of ``v``
onto ``P^k(region)``:

* ``interpolate_plus``   -- r-weighted projections; wall nodes use a wall
  edge, interior nodes a triangle;
* ``interpolate_minus``  -- as above, except that nodes on the axis use the
  unweighted projection onto an axis edge;
* ``project_nodewise``   -- the r-weighted projection onto a triangle
  containing the node, for every node.

Ties between qualifying edges or triangles go to the lowest index.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .elements import lagrange_1d
from .errors import DegenerateAssignmentRegion
from .mesh import GAMMA, GAMMA0
from .quadrature import quadrature_rule, segment_rule
from .spaces import LagrangeSpace, inverse_jacobians, jacobians

__all__ = ["NodeAssignment", "assign_nodes", "interpolate_plus", "interpolate_minus",
           "project_nodewise"]

log = logging.getLogger(__name__)

EDGE, TRIANGLE = 0, 1
_COND_LIMIT = 1e13


@dataclass(frozen=True, eq=False)
class NodeAssignment:
    """Projection region of every dof node.

    ``region_kind[i]`` is ``EDGE`` or ``TRIANGLE``; ``edge[i]`` indexes
    ``mesh.edges`` (-1 for triangles); ``triangle[i]`` is ``T(x_i)``;
    ``weighted[i]`` says whether the projection carries the factor ``r``;
    ``relaxed[i]`` flags nodes where the axis-avoidance rules could not be met.
    """

    space: LagrangeSpace
    region_kind: np.ndarray
    edge: np.ndarray
    triangle: np.ndarray
    weighted: np.ndarray
    relaxed: np.ndarray


def _resolve_space(space, k):
    if isinstance(space, LagrangeSpace):
        if k is not None and k != space.degree:
            return LagrangeSpace(space.mesh, k)
        return space
    # Taylor-Hood space: pick the component of the requested degree
    if k is None or k == space.velocity.degree:
        return space.velocity
    if k == space.pressure.degree:
        return space.pressure
    return LagrangeSpace(space.mesh, k)


def _dof_incidence(space):
    """Lowest-index triangle containing each dof and (dof, boundary edge) pairs."""
    mesh = space.mesh
    cd = space.cell_dofs
    first_tri = np.full(space.n_dofs, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(first_tri, cd.ravel(), np.repeat(np.arange(mesh.n_triangles), cd.shape[1]))
    bidx = np.nonzero(mesh.edge_tags >= 0)[0]
    ned = space.degree - 1
    cols = [mesh.edges[bidx, 0], mesh.edges[bidx, 1]]
    cols += [mesh.n_nodes + bidx * ned + j for j in range(ned)]
    dofs = np.concatenate(cols)
    edges = np.tile(bidx, len(cols))
    return first_tri, dofs, edges


def _edge_triangle(mesh):
    """The triangle owning each boundary edge (-1 for interior edges)."""
    te = mesh.tri_edges
    best = np.full(len(mesh.edges), np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(best, te.ravel(), np.repeat(np.arange(mesh.n_triangles), 3))
    return best


def assign_nodes(space, mode="plus"):
    """Region assignment for ``mode`` in ``{"plus", "minus", "nodewise"}``."""
    mesh = space.mesh
    n = space.n_dofs
    first_tri, pair_dof, pair_edge = _dof_incidence(space)
    kind = np.full(n, TRIANGLE, dtype=np.int8)
    edge = np.full(n, -1, dtype=np.int64)
    tri = first_tri.copy()
    weighted = np.ones(n, dtype=bool)
    relaxed = np.zeros(n, dtype=bool)
    if mode == "nodewise":
        return NodeAssignment(space, kind, edge, tri, weighted, relaxed)
    if mode not in ("plus", "minus"):
        raise ValueError(f"unknown mode {mode!r}")

    on_g0 = space.dof_on_gamma0
    on_g = space.dof_on_gamma
    edge_tag = mesh.edge_tags[pair_edge]
    edge_touches_axis = mesh.node_on_gamma0[mesh.edges[pair_edge]].any(axis=1)
    owner = _edge_triangle(mesh)
    tri_touches_axis = mesh.node_on_gamma0[mesh.triangles].any(axis=1)
    order = np.lexsort((pair_edge, pair_dof))
    pair_dof, pair_edge = pair_dof[order], pair_edge[order]
    edge_tag, edge_touches_axis = edge_tag[order], edge_touches_axis[order]

    def pick(mask_pairs, dof_mask):
        """Lowest qualifying edge per dof among the masked pairs."""
        chosen = np.full(n, -1, dtype=np.int64)
        sel = mask_pairs & dof_mask[pair_dof]
        d, e = pair_dof[sel], pair_edge[sel]
        first = np.unique(d, return_index=True)[1]
        chosen[d[first]] = e[first]
        return chosen

    # wall nodes (closure of the wall): a wall edge, avoiding the axis unless
    # the node itself lies on it
    strict = pick((edge_tag == GAMMA) & (~edge_touches_axis | on_g0[pair_dof]), on_g)
    loose = pick(edge_tag == GAMMA, on_g)
    wall = on_g.copy()
    relaxed[wall & (strict < 0)] = True
    e_wall = np.where(strict >= 0, strict, loose)
    kind[wall] = EDGE
    edge[wall] = e_wall[wall]

    axis_only = on_g0 & ~on_g
    axis_edge = pick(edge_tag == GAMMA0, on_g0)
    if mode == "plus":
        # the weight r vanishes on axis edges, so axis nodes project onto the
        # triangle owning their axis edge
        kind[axis_only] = TRIANGLE
        tri[axis_only] = owner[axis_edge[axis_only]]
    else:
        axis_nodes = on_g0
        kind[axis_nodes] = EDGE
        edge[axis_nodes] = axis_edge[axis_nodes]
        weighted[axis_nodes] = False

    is_edge = kind == EDGE
    tri[is_edge] = owner[edge[is_edge]]
    # T(x_i) must avoid the axis when e(x_i) does
    e_avoids = np.zeros(n, dtype=bool)
    e_avoids[is_edge] = ~mesh.node_on_gamma0[mesh.edges[edge[is_edge]]].any(axis=1)
    relaxed |= is_edge & e_avoids & tri_touches_axis[tri]
    if np.any(relaxed):
        msg = (f"{int(relaxed.sum())} node(s) could not be assigned a region avoiding the axis; "
               "using the lowest-index candidate")
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        log.info(msg)
    return NodeAssignment(space, kind, edge, tri, weighted, relaxed)


def _eval_v(v, r, z):
    return np.broadcast_to(np.asarray(v(r, z), dtype=float), np.broadcast(r, z).shape)


def _check_gram(G):
    if len(G) == 0:
        return
    c = np.linalg.cond(G)
    if not np.all(np.isfinite(c)) or np.any(c > _COND_LIMIT):
        raise DegenerateAssignmentRegion("local Gram matrix is singular or badly conditioned")


def _triangle_projection_values(v, space, tris, nodes, quad_degree):
    """Value at ``nodes[i]`` of the r-weighted projection of ``v`` on ``tris[i]``."""
    if len(tris) == 0:
        return np.zeros(0)
    mesh = space.mesh
    uniq, inv = np.unique(tris, return_inverse=True)
    rule = quadrature_rule(quad_degree)
    el = space.element
    phi = el.values(rule.xy)  # (nq, nb)
    x = np.einsum("qk,tkd->tqd", rule.points, mesh.nodes[mesh.triangles[uniq]])
    detj = np.abs(np.linalg.det(jacobians(mesh)[uniq]))
    w = rule.weights[None, :] * detj[:, None] * x[..., 0]
    # scale out the triangle size so conditioning reflects shape only
    w = w / (detj[:, None] * np.maximum(x[..., 0].mean(axis=1, keepdims=True), 1e-300))
    G = np.einsum("tq,qa,qb->tab", w, phi, phi)
    rhs = np.einsum("tq,tq,qa->ta", w, _eval_v(v, x[..., 0], x[..., 1]), phi)
    _check_gram(G)
    coef = np.linalg.solve(G, rhs[..., None])[..., 0]  # (nu, nb)
    # reference coordinates of each node in its triangle
    p0 = mesh.nodes[mesh.triangles[tris, 0]]
    xi = np.einsum("tij,tj->ti", inverse_jacobians(mesh)[tris], nodes - p0)
    vals = el.values(xi)  # (n, nb)
    return np.einsum("nb,nb->n", vals, coef[inv])


def _edge_projection_values(v, space, edges, nodes, weighted, quad_degree):
    """Value at ``nodes[i]`` of the projection of ``v`` onto ``P^k(edges[i])``."""
    if len(edges) == 0:
        return np.zeros(0)
    mesh = space.mesh
    k = space.degree
    key = edges * 2 + weighted.astype(np.int64)
    uniq, first, inv = np.unique(key, return_index=True, return_inverse=True)
    ue = edges[first]
    uw = weighted[first]
    t, wq = segment_rule(quad_degree)
    _, psi = lagrange_1d(k, t)  # (nq, k+1)
    a = mesh.nodes[mesh.edges[ue, 0]]
    b = mesh.nodes[mesh.edges[ue, 1]]
    x = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]  # (ne, nq, 2)
    wgt = np.where(uw[:, None], x[..., 0], 1.0)
    # relative weights: the edge length and the mean of r drop out of the projection
    wgt = wgt / np.maximum(wgt.mean(axis=1, keepdims=True), 1e-300)
    w = wq[None, :] * wgt
    G = np.einsum("eq,qa,qb->eab", w, psi, psi)
    rhs = np.einsum("eq,eq,qa->ea", w, _eval_v(v, x[..., 0], x[..., 1]), psi)
    _check_gram(G)
    coef = np.linalg.solve(G, rhs[..., None])[..., 0]
    ab = (b - a)[inv]
    s = np.einsum("nd,nd->n", nodes - a[inv], ab) / np.einsum("nd,nd->n", ab, ab)
    _, vals = lagrange_1d(k, s)
    return np.einsum("nb,nb->n", vals, coef[inv])


def _apply(v, assignment, quad_degree):
    space = assignment.space
    x = space.dof_coords
    out = np.empty(space.n_dofs)
    qd = min(2 * space.degree + 6, 40) if quad_degree is None else quad_degree
    tmask = assignment.region_kind == TRIANGLE
    out[tmask] = _triangle_projection_values(v, space, assignment.triangle[tmask], x[tmask], qd)
    emask = ~tmask
    out[emask] = _edge_projection_values(v, space, assignment.edge[emask], x[emask],
                                         assignment.weighted[emask], qd)
    return out


def interpolate_plus(v, space, k=None, quad_degree=None):
    """Coefficients of the r-weighted quasi-interpolant of ``v(r, z)``.

    Parameters
    ----------
    v : callable
    space : LagrangeSpace or TaylorHoodSpace
        With a Taylor-Hood space the component of degree ``k`` is used
        (velocity by default).
    k : int, optional
        Polynomial degree.

    Raises
    ------
    DegenerateAssignmentRegion
    """
    sp = _resolve_space(space, k)
    return _apply(v, assign_nodes(sp, "plus"), quad_degree)


def interpolate_minus(v, space, k=None, quad_degree=None):
    """Like :func:`interpolate_plus`, but axis nodes use unweighted axis-edge projections."""
    sp = _resolve_space(space, k)
    return _apply(v, assign_nodes(sp, "minus"), quad_degree)


def project_nodewise(v, space, k=None, quad_degree=None):
    """Coefficients from r-weighted projections onto one triangle per node."""
    sp = _resolve_space(space, k)
    return _apply(v, assign_nodes(sp, "nodewise"), quad_degree)
