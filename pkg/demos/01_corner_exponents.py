"""
Corner exponents and grading factors
====================================

The velocity of the meridian Stokes problem is singular at reentrant corners
of the wall and at some corners where the wall meets the symmetry axis.  The
strength of the singularity is measured by an exponent ``eta``; from it the
mesh grading factor ``kappa`` follows.  This script tabulates both for a few
corner angles and for the built-in domains.

Run with ``python demos/01_corner_exponents.py``.
"""
# %%
# Off-axis corners: the exponent is the smallest positive root of
# ``sin(lam * omega)**2 - lam**2 * sin(omega)**2``.  Convex corners give
# ``eta = 1`` (no singularity); the crack (``omega = 2 pi``) gives ``1/2``.
import math

import numpy as np

from axistokes import (auto_kappas, builtin_domain, corner_exponent_2d, corner_roots,
                       kappa_from_eta, vertex_exponents)

print(f"{'omega/pi':>9} {'eta':>12} {'kappa (k=1)':>12} {'kappa (k=2)':>12}")
for t in (0.5, 0.9, 1.05, 1.25, 1.5, 1.75, 2.0):
    eta = corner_exponent_2d(t * math.pi)
    print(f"{t:9.2f} {eta:12.9f} {kappa_from_eta(0.95 * eta, 1):12.6f} "
          f"{kappa_from_eta(0.95 * eta, 2):12.6f}")

# %%
# All roots in an interval, not just the smallest one.
print("\nroots for omega = 1.5 pi:", np.round(corner_roots(1.5 * math.pi, (0.05, 3.0)), 6))

# %%
# Domains: every corner is classified as off-axis, on-axis or axis-wall
# junction.  On-axis exponents come from a small table (0.75 pi -> 0.711);
# other on-axis angles need an explicit override.
for name in ("omega1", "omega2"):
    dom = builtin_domain(name)
    kappas, exps = auto_kappas(dom, k=1)
    print(f"\n{name}: marked vertex {dom.marked_vertex}")
    for e in exps:
        print(f"  vertex {e.vertex_index}: omega = {e.omega:.6f}, eta = {e.eta:.6f}, "
              f"kappa = {kappas[e.vertex_index]:.6f} ({e.source.value})")

# %%
# Overriding the exponent of a vertex that is not in the table.
dom = builtin_domain("omega2")
(e,) = vertex_exponents(dom, {1: 0.8}, [1])
print(f"\nomega2 vertex 1 with override: eta = {e.eta:.4f} ({e.source.value})")
