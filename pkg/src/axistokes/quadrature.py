"""Interior-point quadrature on the reference triangle and reference segment.

Triangle rules are collapsed Gauss-Jacobi products: every point lies strictly
inside the triangle and every weight is positive, so integrands carrying a
``1/r`` factor are never evaluated on the axis.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import UnsupportedDegree

__all__ = ["QuadratureRule", "quadrature_rule", "segment_rule", "MAX_DEGREE"]

MAX_DEGREE = 40


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Rule on the triangle (0,0), (1,0), (0,1).

    ``points`` holds barycentric coordinates ``(l0, l1, l2)`` with
    ``(x, y) = (l1, l2)``; the weights sum to the reference area 1/2.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def xy(self):
        return self.points[:, 1:]

    def __len__(self):
        return len(self.weights)


@lru_cache(maxsize=None)
def quadrature_rule(degree):
    """Rule exact for polynomials of total degree ``<= degree``."""
    degree = int(degree)
    if degree < 0 or degree > MAX_DEGREE:
        raise UnsupportedDegree(f"quadrature degree {degree} outside [0, {MAX_DEGREE}]")
    n = max(1, (degree + 2) // 2)
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    xl, wl = roots_legendre(n)
    s = 0.5 * (1.0 + xj)
    ws = 0.25 * wj
    t = 0.5 * (1.0 + xl)
    wt = 0.5 * wl
    S, T = np.meshgrid(s, t, indexing="ij")
    x = S.ravel()
    y = (T * (1.0 - S)).ravel()
    w = np.outer(ws, wt).ravel()
    pts = np.column_stack([1.0 - x - y, x, y])
    pts.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(points=pts, weights=w, degree=degree)


@lru_cache(maxsize=None)
def segment_rule(degree):
    """Gauss-Legendre rule on [0, 1]: returns ``(t, w)`` with ``sum(w) == 1``."""
    n = max(1, (int(degree) + 2) // 2)
    x, w = roots_legendre(n)
    return 0.5 * (1.0 + x), 0.5 * w
