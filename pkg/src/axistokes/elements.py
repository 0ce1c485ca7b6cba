"""Lagrange elements of arbitrary degree on the reference triangle.

Local node order: the three vertices, then ``p - 1`` nodes on each local edge
``(0,1), (1,2), (2,0)`` running from the first to the second vertex, then the
interior lattice points.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import UnsupportedDegree

__all__ = ["LagrangeElement", "lagrange_element", "LOCAL_EDGES", "lagrange_1d"]

LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))


def _lattice(p):
    """Barycentric coordinates of the local nodes, shape (nb, 3)."""
    eye = np.eye(3)
    nodes = [eye[0], eye[1], eye[2]]
    for a, b in LOCAL_EDGES:
        for j in range(1, p):
            nodes.append((1 - j / p) * eye[a] + (j / p) * eye[b])
    for i in range(1, p):
        for j in range(1, p - i):
            k = p - i - j
            nodes.append(np.array([k, i, j], dtype=float) / p)
    return np.array(nodes)


class LagrangeElement:
    """Nodal basis of P^p on the reference triangle."""

    def __init__(self, degree):
        if degree < 1:
            raise UnsupportedDegree(f"Lagrange degree must be >= 1, got {degree}")
        self.degree = p = int(degree)
        self.nodes = _lattice(p)
        self.n_basis = len(self.nodes)
        self.n_edge = p - 1
        self.n_interior = (p - 1) * (p - 2) // 2
        self.monomials = [(a, s - a) for s in range(p + 1) for a in range(s, -1, -1)]
        x, y = self.nodes[:, 1], self.nodes[:, 2]
        vander = np.column_stack([x ** a * y ** b for a, b in self.monomials])
        self.coef = np.linalg.solve(vander, np.eye(self.n_basis))

    def _mono(self, xy, dx=0, dy=0):
        x, y = xy[:, 0], xy[:, 1]
        cols = []
        for a, b in self.monomials:
            if a < dx or b < dy:
                cols.append(np.zeros_like(x))
                continue
            ca = np.prod(np.arange(a - dx + 1, a + 1)) if dx else 1.0
            cb = np.prod(np.arange(b - dy + 1, b + 1)) if dy else 1.0
            cols.append(ca * cb * x ** (a - dx) * y ** (b - dy))
        return np.column_stack(cols)

    def values(self, xy):
        """Basis values at reference points ``xy`` (n, 2), shape (n, nb)."""
        return self._mono(np.atleast_2d(xy)) @ self.coef

    def derivative(self, xy, dx, dy):
        return self._mono(np.atleast_2d(xy), dx, dy) @ self.coef

    def gradients(self, xy):
        """Reference gradients, shape (n, nb, 2)."""
        xy = np.atleast_2d(xy)
        return np.stack([self.derivative(xy, 1, 0), self.derivative(xy, 0, 1)], axis=-1)


@lru_cache(maxsize=None)
def lagrange_element(degree):
    return LagrangeElement(degree)


@lru_cache(maxsize=None)
def _lagrange_1d_coef(p):
    t = np.concatenate([[0.0, 1.0], np.arange(1, p) / p])
    vander = np.vander(t, p + 1, increasing=True)
    return t, np.linalg.solve(vander, np.eye(p + 1))


def lagrange_1d(p, t):
    """Values of the degree-``p`` nodal basis on [0, 1] at ``t``.

    Node order is ``0, 1, 1/p, 2/p, ..., (p-1)/p``. Returns ``(nodes, values)``
    with ``values`` of shape ``(len(t), p + 1)``.
    """
    nodes, coef = _lagrange_1d_coef(p)
    return nodes, np.vander(np.asarray(t, float), p + 1, increasing=True) @ coef
