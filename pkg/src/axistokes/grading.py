"""Corner singularity exponents and the grading parameter.

For an off-axis corner of interior angle ``omega`` the leading exponent of the
2D Dirichlet Stokes corner problem is the smallest positive root of

    g(lam) = sin(lam * omega)**2 - lam**2 * sin(omega)**2.

On-axis corners need the exponent of a 3D cone problem, which is not computed
here; a small table of literature values is shipped and anything else must be
supplied by the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .domain import VertexKind
from .errors import MissingOnAxisOmega, NoRootFound, NonPositiveA

__all__ = [
    "ExponentSource",
    "VertexExponent",
    "ON_AXIS_DEFAULTS",
    "characteristic",
    "corner_roots",
    "corner_exponent_2d",
    "eta_for_vertex",
    "kappa_from_eta",
    "vertex_exponents",
    "auto_kappas",
]

SCAN_STEP = 1e-3
ROOT_XTOL = 1e-12

#: On-axis interior angle -> omega. Matched to 1e-9 rad.
ON_AXIS_DEFAULTS = {0.75 * math.pi: 0.711}


class ExponentSource(str, Enum):
    COMPUTED_2D = "Computed2D"
    USER_SUPPLIED = "UserSupplied"
    DEFAULT = "Default"


@dataclass(frozen=True)
class VertexExponent:
    vertex_index: int | None
    omega: float
    eta: float
    source: ExponentSource

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")


def characteristic(lam, angle):
    """``g(lam) = sin^2(lam*angle) - lam^2 sin^2(angle)``."""
    lam = np.asarray(lam, dtype=float)
    return np.sin(lam * angle) ** 2 - lam ** 2 * math.sin(angle) ** 2


def _factor_roots(h, lo, hi, step):
    """Sign changes of ``h`` on a uniform grid, refined with brentq."""
    n = max(2, int(math.ceil((hi - lo) / step)) + 1)
    grid = np.linspace(lo, hi, n)
    vals = h(grid)
    roots = list(grid[vals == 0.0])
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    for i in flips:
        roots.append(brentq(h, grid[i], grid[i + 1], xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps))
    return roots


def corner_roots(angle, interval=(0.05, 3.0), step=SCAN_STEP):
    """All real roots of ``g`` found in ``interval``, sorted.

    ``g`` factors as ``(sin(lam w) - lam sin w)(sin(lam w) + lam sin w)``; each
    factor is scanned separately, so double roots of ``g`` (which do not change
    its sign, e.g. at ``w = 2 pi``) are still found.
    """
    if not 0 < angle <= 2 * math.pi + 1e-12:
        raise ValueError(f"angle must lie in (0, 2pi], got {angle}")
    s = math.sin(angle)
    lo, hi = interval
    roots = []
    for sign in (1.0, -1.0):
        roots += _factor_roots(lambda x, sg=sign: np.sin(x * angle) - sg * x * s, lo, hi, step)
    roots = np.sort(np.asarray(roots, dtype=float))
    if len(roots):
        keep = np.concatenate([[True], np.diff(roots) > 1e-9])
        roots = roots[keep]
    return roots


def corner_exponent_2d(angle, step=SCAN_STEP):
    """Leading exponent of the 2D Stokes corner of interior angle ``angle``.

    The smallest root in ``(0.05, 1)`` is returned when one exists (reentrant
    corners). Otherwise the smallest root in ``[1, 3]`` is returned; since
    ``lam = 1`` always solves ``g``, that is 1 for convex corners.

    Raises
    ------
    NoRootFound
        If no root is found at all.
    """
    below = corner_roots(angle, (0.05, 1.0), step)
    below = below[below < 1.0 - 1e-8]
    if len(below):
        return float(below[0])
    if abs(float(characteristic(1.0, angle))) <= 1e-12:
        return 1.0
    above = corner_roots(angle, (1.0, 3.0), step)
    if len(above) == 0:
        raise NoRootFound(f"no root of the corner equation for angle {angle}")
    return float(above[0])


def _table_lookup(angle, table):
    for a, w in table.items():
        if abs(a - angle) <= 1e-9:
            return w
    return None


def eta_for_vertex(kind, angle, override_omega=None, *, vertex_index=None, table=None):
    """Singular exponent ``omega`` and grading index ``eta`` of one vertex.

    Off-axis: ``eta = omega``, with ``omega`` from :func:`corner_exponent_2d`
    unless overridden. On-axis: ``eta = omega + 1/2``, with ``omega`` from the
    override or the default table.
    """
    kind = VertexKind(kind)
    if override_omega is not None:
        omega, source = float(override_omega), ExponentSource.USER_SUPPLIED
    elif kind is VertexKind.OFF_AXIS:
        omega, source = corner_exponent_2d(angle), ExponentSource.COMPUTED_2D
    else:
        omega = _table_lookup(angle, ON_AXIS_DEFAULTS if table is None else table)
        if omega is None:
            raise MissingOnAxisOmega(
                f"no default exponent for an on-axis vertex of angle {angle / math.pi:.6g}*pi; "
                "supply one explicitly")
        source = ExponentSource.DEFAULT
    eta = omega + 0.5 if kind is VertexKind.ON_AXIS else omega
    return VertexExponent(vertex_index=vertex_index, omega=omega, eta=eta, source=source)


def kappa_from_eta(a, k):
    """``min(1/2, 2**(-(k+1)/a))``; pass ``a`` strictly below ``eta``."""
    if not a > 0:
        raise NonPositiveA(f"a must be positive, got {a}")
    return min(0.5, 2.0 ** (-(k + 1) / a))


def vertex_exponents(domain, overrides=None, vertices=None):
    """:class:`VertexExponent` for each requested corner of ``domain``.

    ``vertices`` defaults to all corners; ``overrides`` maps vertex index to
    omega.
    """
    overrides = dict(overrides or {})
    vertices = domain.corners if vertices is None else vertices
    out = []
    for i in vertices:
        out.append(eta_for_vertex(domain.vertex_kinds[i], domain.interior_angles[i],
                                  overrides.get(i), vertex_index=int(i)))
    return out


def auto_kappas(domain, k, overrides=None, safety=0.95):
    """Per-vertex ``kappa_from_eta(safety * eta_i, k)`` for the graded vertices.

    The graded vertices are the domain's marked vertex plus any overridden
    ones; a domain without a marked vertex grades every corner.
    """
    overrides = dict(overrides or {})
    if domain.marked_vertex is None:
        verts = list(domain.corners)
    else:
        verts = sorted({int(domain.marked_vertex), *map(int, overrides)})
    exps = vertex_exponents(domain, overrides, verts)
    return {e.vertex_index: kappa_from_eta(safety * e.eta, k) for e in exps}, exps
