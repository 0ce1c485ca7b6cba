"""Continuous Lagrange spaces and the Taylor-Hood pair on a :class:`TriMesh`.

Global numbering of a degree-``p`` space: mesh nodes first (same indices),
then ``p - 1`` nodes per mesh edge running from the lower to the higher node
index, then interior nodes triangle by triangle.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .elements import LOCAL_EDGES, lagrange_element
from .errors import EmptySpace, UnsupportedDegree
from .mesh import GAMMA, GAMMA0

__all__ = ["LagrangeSpace", "TaylorHoodSpace", "build_space", "DiscreteField"]


class LagrangeSpace:
    """Continuous piecewise polynomials of degree ``degree`` on ``mesh``."""

    def __init__(self, mesh, degree):
        if degree < 1:
            raise UnsupportedDegree(f"degree must be >= 1, got {degree}")
        self.mesh = mesh
        self.degree = p = int(degree)
        self.element = el = lagrange_element(p)
        n, ne, nt = mesh.n_nodes, len(mesh.edges), mesh.n_triangles
        ned = p - 1
        dofs = np.empty((nt, el.n_basis), dtype=np.int64)
        dofs[:, :3] = mesh.triangles
        t = mesh.triangles
        for le, (a, b) in enumerate(LOCAL_EDGES):
            eidx = mesh.tri_edges[:, le]
            base = n + eidx * ned
            forward = t[:, a] < t[:, b]
            for j in range(ned):
                col = 3 + le * ned + j
                dofs[:, col] = np.where(forward, base + j, base + (ned - 1 - j))
        nint = el.n_interior
        if nint:
            start = n + ne * ned
            dofs[:, 3 + 3 * ned:] = start + np.arange(nt)[:, None] * nint + np.arange(nint)
        self.cell_dofs = dofs
        self.n_dofs = n + ne * ned + nt * nint
        if self.n_dofs == 0:
            raise EmptySpace("space has no degrees of freedom")

    @cached_property
    def dof_coords(self):
        pts = np.empty((self.n_dofs, 2))
        x = self.mesh.nodes[self.mesh.triangles]  # (T, 3, 2)
        local = np.einsum("bk,tkd->tbd", self.element.nodes, x)
        pts[self.cell_dofs.ravel()] = local.reshape(-1, 2)
        pts[: self.mesh.n_nodes] = self.mesh.nodes
        on_axis = self.dof_on_gamma0 & ~self.dof_on_gamma
        pts[on_axis, 0] = 0.0
        return pts

    def _dofs_on_tagged_edges(self, tag):
        mesh = self.mesh
        mask = np.zeros(self.n_dofs, dtype=bool)
        mask[: mesh.n_nodes] = mesh.node_on_gamma0 if tag == GAMMA0 else mesh.node_on_gamma
        ned = self.degree - 1
        if ned:
            eidx = np.nonzero(mesh.edge_tags == tag)[0]
            ids = mesh.n_nodes + eidx[:, None] * ned + np.arange(ned)
            mask[ids.ravel()] = True
        return mask

    @cached_property
    def dof_on_gamma0(self):
        """Dofs on the closure of the axis boundary."""
        return self._dofs_on_tagged_edges(GAMMA0)

    @cached_property
    def dof_on_gamma(self):
        """Dofs on the closure of the wall boundary."""
        return self._dofs_on_tagged_edges(GAMMA)

    @property
    def dof_on_boundary(self):
        return self.dof_on_gamma0 | self.dof_on_gamma

    def interpolate(self, func):
        """Nodal interpolant of ``func(r, z)``."""
        x = self.dof_coords
        return np.asarray(func(x[:, 0], x[:, 1]), dtype=float) * np.ones(self.n_dofs)


@dataclass(frozen=True, eq=False)
class TaylorHoodSpace:
    """Velocity of degree ``k+1`` (both components) and pressure of degree ``k``.

    ``u_r`` is constrained on the whole boundary, ``u_z`` on the wall only.
    """

    mesh: object
    k: int
    velocity: LagrangeSpace
    pressure: LagrangeSpace

    @property
    def n_velocity(self):
        return self.velocity.n_dofs

    @property
    def n_pressure(self):
        return self.pressure.n_dofs

    @cached_property
    def ur_constrained(self):
        return self.velocity.dof_on_boundary

    @cached_property
    def uz_constrained(self):
        return self.velocity.dof_on_gamma

    @cached_property
    def velocity_free(self):
        """Free mask over the stacked ``(u_r, u_z)`` vector."""
        return np.concatenate([~self.ur_constrained, ~self.uz_constrained])

    @property
    def n_dofs(self):
        return 2 * self.n_velocity + self.n_pressure


def build_space(mesh, k):
    """Taylor-Hood space ``P^{k+1} x P^{k+1} x P^k`` on ``mesh``."""
    if k < 1:
        raise UnsupportedDegree(f"Taylor-Hood pressure degree k must be >= 1, got {k}")
    return TaylorHoodSpace(mesh=mesh, k=int(k), velocity=LagrangeSpace(mesh, k + 1),
                           pressure=LagrangeSpace(mesh, k))


class DiscreteField:
    """A coefficient vector on a :class:`LagrangeSpace`."""

    def __init__(self, space, coeffs):
        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.shape != (space.n_dofs,):
            raise ValueError(f"expected {space.n_dofs} coefficients, got {self.coeffs.shape}")

    def __sub__(self, other):
        if other.space is not self.space:
            raise ValueError("fields live on different spaces")
        return DiscreteField(self.space, self.coeffs - other.coeffs)

    def __add__(self, other):
        if other.space is not self.space:
            raise ValueError("fields live on different spaces")
        return DiscreteField(self.space, self.coeffs + other.coeffs)

    def __mul__(self, s):
        return DiscreteField(self.space, s * self.coeffs)

    __rmul__ = __mul__

    def values_at(self, xy_ref, cells=None):
        """Values at reference points in each cell, shape (ncells, nq)."""
        cd = self.space.cell_dofs if cells is None else self.space.cell_dofs[cells]
        phi = self.space.element.values(xy_ref)
        return self.coeffs[cd] @ phi.T

    def gradients_at(self, xy_ref, cells=None):
        """Physical gradients at reference points, shape (ncells, nq, 2)."""
        mesh = self.space.mesh
        cells = np.arange(mesh.n_triangles) if cells is None else cells
        ginv = inverse_jacobians(mesh)[cells]
        dphi = self.space.element.gradients(xy_ref)  # (nq, nb, 2)
        c = self.coeffs[self.space.cell_dofs[cells]]   # (nc, nb)
        gref = np.einsum("cb,qbd->cqd", c, dphi)
        return np.einsum("cqd,ced->cqe", gref, ginv)

    def __call__(self, r, z):
        """Point evaluation by brute-force cell location (test helper)."""
        return evaluate_at_points(self, np.column_stack([np.ravel(r), np.ravel(z)]))


def jacobians(mesh):
    """Affine map Jacobians ``J[t] = [x1 - x0, x2 - x0]`` as columns, (T, 2, 2)."""
    p = mesh.nodes[mesh.triangles]
    return np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)


def inverse_jacobians(mesh):
    """``G[t]`` with reference gradient -> physical gradient ``g_phys = g_ref @ G``.

    ``G = J^{-1}``, so ``grad_x phi = J^{-T} grad_ref phi`` reads
    ``g_ref @ J^{-1}`` for row vectors.
    """
    return np.linalg.inv(jacobians(mesh))


def locate_points(mesh, pts, tol=1e-12):
    """Cell index and reference coordinates of every point (brute force)."""
    p0 = mesh.nodes[mesh.triangles[:, 0]]
    ginv = inverse_jacobians(mesh)
    cells = np.full(len(pts), -1, dtype=np.int64)
    ref = np.zeros((len(pts), 2))
    for i, x in enumerate(pts):
        xi = np.einsum("tij,tj->ti", ginv, x - p0)
        lam_min = np.minimum(np.minimum(xi[:, 0], xi[:, 1]), 1 - xi[:, 0] - xi[:, 1])
        t = int(np.argmax(lam_min))
        if lam_min[t] < -tol:
            raise ValueError(f"point {x} outside the mesh")
        cells[i] = t
        ref[i] = xi[t]
    return cells, ref


def evaluate_at_points(field, pts):
    cells, ref = locate_points(field.space.mesh, pts)
    phi = field.space.element.values(ref)  # (n, nb)
    return np.einsum("nb,nb->n", phi, field.coeffs[field.space.cell_dofs[cells]])
