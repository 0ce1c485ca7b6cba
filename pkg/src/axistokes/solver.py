"""Solvers for the symmetric indefinite saddle-point system.

Two paths:

* ``direct`` -- sparse LU with a symmetric fill-reducing ordering and
  diagonal pivoting (the velocity block is eliminated before the pressure it
  couples to, so zero pressure diagonals are filled in before they are
  reached), followed by iterative refinement to ``rel_tol``;
* ``minres`` -- MINRES with an SPD block-diagonal preconditioner: one AMG
  V-cycle per velocity component, the r-weighted pressure mass matrix for the
  pressure and the matching scalar for the mean-value multiplier.

``auto`` picks the direct path below ``DIRECT_LIMIT`` unknowns.
"""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as sla

from .assembly import pressure_mass_matrix
from .errors import NoConvergence, SingularSystem
from .spaces import DiscreteField

__all__ = ["FieldSolution", "solve_saddle", "DIRECT_LIMIT"]

log = logging.getLogger(__name__)

DIRECT_LIMIT = 250_000
#: Pivots this small relative to their column mark a singular matrix. Valid
#: systems on strongly graded meshes stay above ~1e-8.
PIVOT_RATIO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FieldSolution:
    """Full coefficient vectors of ``(u_r, u_z, p)`` on one mesh."""

    space: object
    ur: np.ndarray
    uz: np.ndarray
    p: np.ndarray
    multiplier: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def mesh(self):
        return self.space.mesh

    def velocity_r(self):
        return DiscreteField(self.space.velocity, self.ur)

    def velocity_z(self):
        return DiscreteField(self.space.velocity, self.uz)

    def pressure(self):
        return DiscreteField(self.space.pressure, self.p)

    def pressure_mean(self, c):
        """``int p r`` given the constraint vector ``c``."""
        return float(c @ self.p)


def _relres(K, x, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(b - K @ x)
    return r / nb if nb > 0 else r


def _min_pivot_ratio(lu, Kc):
    """Smallest ``|U_jj|`` relative to the largest entry of its column of ``K``."""
    colmax = abs(Kc).max(axis=0).toarray().ravel()
    permuted = np.empty_like(colmax)
    permuted[lu.perm_c] = colmax
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(lu.U.diagonal()) / permuted
    ratio[~np.isfinite(ratio)] = 0.0
    return float(ratio.min()) if len(ratio) else 1.0


def _factor(Kc, **kw):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", sla.MatrixRankWarning)
            lu = sla.splu(Kc, **kw)
    except (RuntimeError, sla.MatrixRankWarning):
        return None, 0.0
    return lu, _min_pivot_ratio(lu, Kc)


def _solve_direct(K, b, rel_tol, max_refine=5):
    t0 = time.perf_counter()
    Kc = K.tocsc()
    lu, ratio = _factor(Kc, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                        options=dict(SymmetricMode=True))
    if ratio < PIVOT_RATIO_TOL:
        # the static pivot order can meet a zero diagonal; retry with
        # threshold pivoting before declaring the matrix singular
        lu, ratio = _factor(Kc, permc_spec="COLAMD")
        if ratio < PIVOT_RATIO_TOL:
            raise SingularSystem(f"matrix is numerically singular (pivot ratio {ratio:.2e})")
    t_fact = time.perf_counter() - t0
    x = lu.solve(b)
    res = _relres(K, x, b)
    steps = 0
    # one step is always taken: it repairs rows with tiny entries (pressure
    # dofs at strongly graded axis corners) whose error the normwise residual
    # does not see
    while steps < max_refine and (steps == 0 or res > 0.1 * rel_tol):
        x = x + lu.solve(b - K @ x)
        new = _relres(K, x, b)
        steps += 1
        if new >= res and steps > 1:
            res = new
            break
        res = new
    diag = dict(method="direct", factor_nnz=int(lu.L.nnz + lu.U.nnz), factor_time=t_fact,
                refinement_steps=steps, residual=res, min_pivot_ratio=ratio)
    return x, diag


class _BlockPreconditioner(sla.LinearOperator):
    """SPD block-diagonal preconditioner for MINRES."""

    def __init__(self, system):
        import pyamg

        space = system.space
        free = system.free
        nv = space.n_velocity
        fr = np.nonzero(free[:nv])[0]
        fz = np.nonzero(free[nv:])[0]
        nfr, nfz = len(fr), len(fz)
        Arr = system.A[:nv, :nv][fr][:, fr].tocsr()
        Azz = system.A[nv:, nv:][fz][:, fz].tocsr()
        self.ml = [pyamg.smoothed_aggregation_solver(Arr, symmetry="symmetric").aspreconditioner(cycle="V"),
                   pyamg.smoothed_aggregation_solver(Azz, symmetry="symmetric").aspreconditioner(cycle="V")]
        Mp = pressure_mass_matrix(space)
        self.mp = sla.splu(Mp.tocsc(), permc_spec="COLAMD")
        self.sl = [slice(0, nfr), slice(nfr, nfr + nfz),
                   slice(nfr + nfz, nfr + nfz + space.n_pressure)]
        n = system.K.shape[0]
        self.has_mult = system.mean_constraint
        if self.has_mult:
            self.mult_scale = 1.0 / float(system.c @ self.mp.solve(system.c))
        super().__init__(dtype=float, shape=(n, n))

    def _matvec(self, x):
        x = np.ravel(x)
        y = np.empty_like(x)
        for ml, s in zip(self.ml, self.sl[:2]):
            y[s] = ml @ x[s]
        y[self.sl[2]] = self.mp.solve(x[self.sl[2]])
        if self.has_mult:
            y[-1] = self.mult_scale * x[-1]
        return y


class _Converged(Exception):
    pass


def _solve_minres(system, b, rel_tol, maxiter=20000, restarts=3):
    K = system.K
    t0 = time.perf_counter()
    P = _BlockPreconditioner(system)
    t_setup = time.perf_counter() - t0
    nb = np.linalg.norm(b)
    x = np.zeros_like(b)
    state = {"n": 0, "x": None}

    # the preconditioned residual MINRES monitors can differ from the
    # Euclidean one by orders of magnitude on graded meshes, so stop on the
    # true residual instead
    def cb(xk):
        state["n"] += 1
        if state["n"] % 5 == 0 and np.linalg.norm(r0 - K @ xk) <= rel_tol * nb:
            state["x"] = xk.copy()
            raise _Converged

    for _ in range(restarts):
        r0 = b - K @ x
        if np.linalg.norm(r0) <= rel_tol * nb:
            break
        state["x"] = None
        try:
            dx, _info = sla.minres(K, r0, M=P, rtol=1e-16, maxiter=maxiter, callback=cb)
        except _Converged:
            dx = state["x"]
        if not np.all(np.isfinite(dx)):
            raise SingularSystem("MINRES produced non-finite iterates")
        x = x + dx
    res = _relres(K, x, b)
    if res > rel_tol:
        raise NoConvergence(f"MINRES stalled at relative residual {res:.3e} after {state['n']} iterations")
    return x, dict(method="minres", iterations=state["n"], setup_time=t_setup, residual=res)


def solve_saddle(system, rel_tol=1e-10, method="auto"):
    """Solve ``system.K x = system.rhs`` and expand to full fields.

    Parameters
    ----------
    system : SaddleSystem
    rel_tol : float
        Required ``||K x - b|| / ||b||``.
    method : {"auto", "direct", "minres"}

    Returns
    -------
    FieldSolution

    Raises
    ------
    SingularSystem, NoConvergence
    """
    if not 0 < rel_tol < 1:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    K, b = system.K, system.rhs
    t0 = time.perf_counter()
    if np.linalg.norm(b) == 0:
        x = np.zeros_like(b)
        diag = dict(method="trivial", residual=0.0)
        if method in ("auto", "direct") and K.shape[0] <= DIRECT_LIMIT:
            # still confirm the operator is invertible
            _solve_direct(K, np.ones_like(b), 0.5)
    else:
        if method == "auto":
            method = "direct" if K.shape[0] <= DIRECT_LIMIT else "minres"
        if method == "direct":
            x, diag = _solve_direct(K, b, rel_tol)
        elif method == "minres":
            x, diag = _solve_minres(system, b, rel_tol)
        else:
            raise ValueError(f"unknown method {method!r}")
        if not np.all(np.isfinite(x)):
            raise SingularSystem("solution contains non-finite values")
        if diag["residual"] > rel_tol:
            raise NoConvergence(f"residual {diag['residual']:.3e} above tolerance {rel_tol:.1e}")
    diag["solve_time"] = time.perf_counter() - t0
    diag["n_unknowns"] = int(K.shape[0])
    ur, uz, p = system.split(x)
    mult = float(x[-1]) if system.mean_constraint else 0.0
    log.debug("solved %d unknowns via %s (residual %.2e)", K.shape[0], diag["method"], diag["residual"])
    return FieldSolution(space=system.space, ur=ur, uz=uz, p=p, multiplier=mult, diagnostics=diag)
