"""Assembly of the axisymmetric Taylor-Hood saddle-point system.

Forms, with ``u = (u_r, u_z)`` and measure ``r dr dz``::

    a(u, v) = int (grad u_r . grad v_r + grad u_z . grad v_z + u_r v_r / r^2) r
    b(u, q) = -int (q div u + q u_r / r) r
    l(v)    = int (f_r v_r + f_z v_z) r

The pressure carries the weighted mean-zero constraint ``int p r = 0``,
imposed through one Lagrange multiplier so the reduced matrix

    [ A   B^T  0 ]
    [ B   0    c ]
    [ 0   c^T  0 ]

stays symmetric. Dirichlet values (zero by default) are eliminated
symmetrically after lifting.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import EmptySpace, QuadratureFailure
from .quadrature import quadrature_rule
from .spaces import inverse_jacobians, jacobians

__all__ = [
    "SaddleSystem",
    "assemble_system",
    "assemble_forms",
    "default_quad_degree",
    "accumulate",
    "pressure_mass_matrix",
]


def default_quad_degree(k):
    """Interior-triangle exactness degree; axis triangles use two more."""
    return 2 * (k + 1) + 2


def accumulate(rows, cols, vals, shape):
    """Sum duplicate entries in a fixed order and return CSR.

    Contributions to ``(i, j)`` and ``(j, i)`` are added in the same element
    order, so symmetric element matrices give a bitwise symmetric result.
    """
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=float).ravel()
    keys = rows * shape[1] + cols
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    vals = vals[order]
    if len(keys) == 0:
        return sp.csr_matrix(shape)
    starts = np.concatenate([[0], np.nonzero(np.diff(keys))[0] + 1])
    summed = np.add.reduceat(vals, starts)
    uk = keys[starts]
    return sp.csr_matrix((summed, (uk // shape[1], uk % shape[1])), shape=shape)


def _cell_groups(mesh, k, quad_degree):
    qd = default_quad_degree(k) if quad_degree is None else int(quad_degree)
    axis = mesh.axis_triangles
    return [(np.nonzero(~axis)[0], quadrature_rule(qd)),
            (np.nonzero(axis)[0], quadrature_rule(qd + 2))]


@dataclass(frozen=True, eq=False)
class _Forms:
    A_rr: sp.csr_matrix
    A_zz: sp.csr_matrix
    B_r: sp.csr_matrix
    B_z: sp.csr_matrix
    c: np.ndarray
    F_r: np.ndarray
    F_z: np.ndarray


def assemble_forms(space, f=None, quad_degree=None, chunk=40000):
    """Raw (unconstrained) blocks of the bilinear and linear forms."""
    mesh = space.mesh
    vel, pre = space.velocity, space.pressure
    nv, npr = vel.n_dofs, pre.n_dofs
    if nv == 0 or npr == 0:
        raise EmptySpace("empty Taylor-Hood space")
    detj_all = np.abs(np.linalg.det(jacobians(mesh)))
    ginv_all = inverse_jacobians(mesh)
    x0_all = mesh.nodes[mesh.triangles]  # (T, 3, 2)

    rows_v, cols_v, vals_rr, vals_zz = [], [], [], []
    rows_b, cols_b, vals_br, vals_bz = [], [], [], []
    c = np.zeros(npr)
    F_r = np.zeros(nv)
    F_z = np.zeros(nv)
    nbv = vel.element.n_basis
    nbp = pre.element.n_basis

    for cells_all, rule in _cell_groups(mesh, space.k, quad_degree):
        xy = rule.xy
        phi = vel.element.values(xy)          # (nq, nbv)
        dphi = vel.element.gradients(xy)      # (nq, nbv, 2)
        psi = pre.element.values(xy)          # (nq, nbp)
        w = rule.weights
        for s in range(0, len(cells_all), chunk):
            cells = cells_all[s:s + chunk]
            if len(cells) == 0:
                continue
            lam = rule.points
            xq = np.einsum("qk,ckd->cqd", lam, x0_all[cells])
            r = xq[..., 0]
            if np.any(r <= 0):
                raise QuadratureFailure("quadrature point on or beyond the axis")
            wdet = w[None, :] * detj_all[cells, None]          # (nc, nq)
            g = np.einsum("qbd,cde->cqbe", dphi, ginv_all[cells])  # (nc, nq, nbv, 2)
            wr = wdet * r
            stiff = np.einsum("cq,cqie,cqje->cij", wr, g, g)
            mass_r = np.einsum("cq,qi,qj->cij", wdet / r, phi, phi)
            a_rr = stiff + mass_r
            a_rr = 0.5 * (a_rr + a_rr.transpose(0, 2, 1))
            a_zz = 0.5 * (stiff + stiff.transpose(0, 2, 1))
            # b(u, q) = -int (q (d_r u_r + d_z u_z) r + q u_r)
            b_r = -(np.einsum("cq,qm,cqi->cmi", wr, psi, g[..., 0])
                    + np.einsum("cq,qm,qi->cmi", wdet, psi, phi))
            b_z = -np.einsum("cq,qm,cqi->cmi", wr, psi, g[..., 1])
            cd_v = vel.cell_dofs[cells]
            cd_p = pre.cell_dofs[cells]
            rows_v.append(np.repeat(cd_v, nbv, axis=1).ravel())
            cols_v.append(np.tile(cd_v, (1, nbv)).ravel())
            vals_rr.append(a_rr.ravel())
            vals_zz.append(a_zz.ravel())
            rows_b.append(np.repeat(cd_p, nbv, axis=1).ravel())
            cols_b.append(np.tile(cd_v, (1, nbp)).ravel())
            vals_br.append(b_r.ravel())
            vals_bz.append(b_z.ravel())
            np.add.at(c, cd_p.ravel(), np.einsum("cq,qm->cm", wr, psi).ravel())
            if f is not None:
                fr, fz = f(xq[..., 0], xq[..., 1])
                fr = np.broadcast_to(np.asarray(fr, dtype=float), r.shape)
                fz = np.broadcast_to(np.asarray(fz, dtype=float), r.shape)
                if not (np.all(np.isfinite(fr)) and np.all(np.isfinite(fz))):
                    raise QuadratureFailure("forcing is not finite at a quadrature point")
                np.add.at(F_r, cd_v.ravel(), np.einsum("cq,qi->ci", wr * fr, phi).ravel())
                np.add.at(F_z, cd_v.ravel(), np.einsum("cq,qi->ci", wr * fz, phi).ravel())
            for arr in (a_rr, b_r):
                if not np.all(np.isfinite(arr)):
                    raise QuadratureFailure("non-finite element matrix entry")

    cat = np.concatenate
    rv, cv = cat(rows_v), cat(cols_v)
    A_rr = accumulate(rv, cv, cat(vals_rr), (nv, nv))
    A_zz = accumulate(rv, cv, cat(vals_zz), (nv, nv))
    rb, cb = cat(rows_b), cat(cols_b)
    B_r = accumulate(rb, cb, cat(vals_br), (npr, nv))
    B_z = accumulate(rb, cb, cat(vals_bz), (npr, nv))
    return _Forms(A_rr, A_zz, B_r, B_z, c, F_r, F_z)


@dataclass(frozen=True, eq=False)
class SaddleSystem:
    """Assembled system with constrained velocity dofs eliminated.

    ``K x = rhs`` with ``x = [u_free, p, multiplier]``; the multiplier row is
    present when ``mean_constraint`` is true.
    """

    space: object
    A: sp.csr_matrix          # full velocity block, (2 nv, 2 nv)
    B: sp.csr_matrix          # full divergence block, (np, 2 nv)
    c: np.ndarray             # int phi_j^p r
    load: np.ndarray          # full velocity load, (2 nv,)
    lift: np.ndarray          # prescribed velocity values on constrained dofs
    K: sp.csr_matrix
    rhs: np.ndarray
    mean_constraint: bool = True

    @property
    def free(self):
        return self.space.velocity_free

    @property
    def n_free_velocity(self):
        return int(self.free.sum())

    def without_mean_constraint(self):
        """Same system with the multiplier row/column dropped (singular)."""
        n = self.K.shape[0] - 1
        return SaddleSystem(self.space, self.A, self.B, self.c, self.load, self.lift,
                            self.K[:n, :n].tocsr(), self.rhs[:n].copy(), mean_constraint=False)

    def split(self, x):
        """Full ``(u_r, u_z, p)`` coefficient vectors from a reduced solution."""
        nv = self.space.n_velocity
        u = self.lift.copy()
        nf = self.n_free_velocity
        u[self.free] = x[:nf]
        p = x[nf:nf + self.space.n_pressure]
        return u[:nv], u[nv:], p

    def dump_coo(self, path):
        """Write ``K`` as 'row col value' lines and the right-hand side alongside."""
        path = Path(path)
        coo = self.K.tocoo()
        with path.open("w") as fh:
            fh.write(f"# {coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
            for i, j, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{i} {j} {v:.17g}\n")
        np.savetxt(path.with_suffix(".rhs.txt"), self.rhs, fmt="%.17g")
        return path


def assemble_system(space, f=None, *, lift=None, quad_degree=None, mean_constraint=True):
    """Assemble the reduced saddle-point system.

    Parameters
    ----------
    space : TaylorHoodSpace
    f : callable, optional
        ``f(r, z) -> (f_r, f_z)`` evaluated on arrays of quadrature points.
        ``None`` means zero forcing.
    lift : callable, optional
        ``lift(r, z) -> (g_r, g_z)`` prescribing velocity values on the
        constrained dofs; zero when omitted. ``g_r`` must vanish on the axis.
    """
    forms = assemble_forms(space, f, quad_degree)
    nv = space.n_velocity
    A = sp.block_diag([forms.A_rr, forms.A_zz], format="csr")
    B = sp.hstack([forms.B_r, forms.B_z], format="csr")
    load = np.concatenate([forms.F_r, forms.F_z])

    g = np.zeros(2 * nv)
    free = space.velocity_free
    if lift is not None:
        x = space.velocity.dof_coords
        gr, gz = lift(x[:, 0], x[:, 1])
        gr = np.broadcast_to(np.asarray(gr, dtype=float), (nv,))
        gz = np.broadcast_to(np.asarray(gz, dtype=float), (nv,))
        g = np.concatenate([gr, gz])
        g[free] = 0.0

    Aff = A[free][:, free]
    Bf = B[:, free]
    rhs_u = load[free] - A[free] @ g
    rhs_p = -(B @ g)
    npr = space.n_pressure
    blocks = [[Aff, Bf.T, None], [Bf, None, sp.csr_matrix(forms.c[:, None])]]
    if mean_constraint:
        blocks.append([None, sp.csr_matrix(forms.c[None, :]), None])
        rhs = np.concatenate([rhs_u, rhs_p, [0.0]])
    else:
        blocks = [[Aff, Bf.T], [Bf, None]]
        rhs = np.concatenate([rhs_u, rhs_p])
    K = sp.bmat(blocks, format="csr")
    if not mean_constraint:
        K = K[: Aff.shape[0] + npr][:, : Aff.shape[0] + npr]
    K.sort_indices()
    return SaddleSystem(space=space, A=A, B=B, c=forms.c, load=load, lift=g, K=K.tocsr(),
                        rhs=rhs, mean_constraint=mean_constraint)


def pressure_mass_matrix(space, quad_degree=None):
    """Weighted pressure mass matrix ``int phi_i phi_j r`` (SPD)."""
    mesh = space.mesh
    pre = space.pressure
    detj = np.abs(np.linalg.det(jacobians(mesh)))
    x0 = mesh.nodes[mesh.triangles]
    rule = quadrature_rule(2 * space.k + 1 if quad_degree is None else quad_degree)
    psi = pre.element.values(rule.xy)
    r = np.einsum("qk,ck->cq", rule.points, x0[..., 0])
    m = np.einsum("cq,qi,qj->cij", rule.weights[None, :] * detj[:, None] * r, psi, psi)
    m = 0.5 * (m + m.transpose(0, 2, 1))
    cd = pre.cell_dofs
    nb = pre.element.n_basis
    rows = np.repeat(cd, nb, axis=1)
    cols = np.tile(cd, (1, nb))
    return accumulate(rows, cols, m, (pre.n_dofs, pre.n_dofs))
