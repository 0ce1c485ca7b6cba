"""
Quasi-interpolation operators
=============================

Three operators map a function onto the Lagrange space:

* ``interpolate_plus`` -- r-weighted local projections, keeps zero wall data;
* ``interpolate_minus`` -- unweighted variant, keeps zero data on the whole
  boundary;
* ``project_nodewise`` -- local projection on one triangle per node.

All three reproduce polynomials of the space degree and converge at the
optimal order for smooth functions.

Run with ``python demos/05_interpolation.py``.
"""
# %%
import numpy as np

from axistokes import (DiscreteField, GradingPlan, LagrangeSpace, NormKind, NormSpec, Poly2D,
                       build_hierarchy, builtin_domain, interpolate_minus, interpolate_plus,
                       project_nodewise, weighted_norm)
from axistokes.norms import ErrorField, FunctionField

dom = builtin_domain("unit_square")
hier = build_hierarchy(dom, GradingPlan.uniform(dom, 0.5), 4, enforce_edge_bound=False)

# %%
# Polynomial reproduction.  On the unit square the two corner nodes where
# the axis meets the wall have no assignment region away from the axis; the
# operators fall back to the lowest-index candidate and say so with a
# RuntimeWarning.
space = LagrangeSpace(hier[2], 2)
v = Poly2D.random(2, 0)
x = space.dof_coords
for op in (interpolate_plus, interpolate_minus, project_nodewise):
    print(f"{op.__name__:>18}: max error on a quadratic {np.abs(op(v, space) - v(x[:, 0], x[:, 1])).max():.1e}")

# %%
# Convergence for a smooth function in the r-weighted L2 and H1 norms.
smooth = FunctionField(
    lambda r, z: np.sin(2 * r) * np.cos(z) + r * r,
    {(1, 0): lambda r, z: 2 * np.cos(2 * r) * np.cos(z) + 2 * r,
     (0, 1): lambda r, z: -np.sin(2 * r) * np.sin(z)})
l2, h1 = NormSpec(NormKind.L2_1), NormSpec(NormKind.H1_1)
for k in (1, 2):
    errs = []
    for j in (2, 3, 4):
        S = LagrangeSpace(hier[j], k)
        e = ErrorField(smooth, DiscreteField(S, interpolate_plus(smooth, S)))
        errs.append([weighted_norm(e, hier[j], l2), weighted_norm(e, hier[j], h1)])
    errs = np.array(errs)
    print(f"k = {k}: orders (L2, H1) = {np.round(np.log2(errs[:-1] / errs[1:]), 2).tolist()}")
