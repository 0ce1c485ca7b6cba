import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axistokes.domain import VertexKind, builtin_domain
from axistokes.errors import MissingOnAxisOmega, NonPositiveA
from axistokes.grading import (ExponentSource, auto_kappas, characteristic, corner_exponent_2d,
                               corner_roots, eta_for_vertex, kappa_from_eta, vertex_exponents)

# Roots of sin(lam w) + lam sin w = 0, computed independently with mpmath
# findroot at 30 digits and frozen here.
ORACLE = {
    1.05: 0.909120628988890650890842654954,
    1.25: 0.673583432147380388934530183272,
    1.50: 0.544483736782463929140876854601,
    1.75: 0.505009698896589424770309220413,
    1.95: 0.500038613397346175987287838710,
}


@pytest.mark.parametrize("a,expected", sorted(ORACLE.items()))
def test_exponent_matches_oracle(a, expected):
    assert corner_exponent_2d(a * math.pi) == pytest.approx(expected, abs=1e-10)


def test_crack_exponent():
    assert abs(corner_exponent_2d(2 * math.pi) - 0.5) <= 1e-9


def test_convex_corners_give_one():
    for a in (0.25, 0.5, 0.75, 0.99):
        assert corner_exponent_2d(a * math.pi) == 1.0


def test_roots_solve_characteristic():
    for a in np.linspace(1.01, 2.0, 12):
        for lam in corner_roots(a * math.pi):
            assert abs(characteristic(lam, a * math.pi)) <= 1e-10


def test_exponent_monotone_on_reentrant_range():
    angles = np.linspace(1.05, 2.0, 10) * math.pi
    lams = [corner_exponent_2d(w) for w in angles]
    assert all(x >= y - 1e-12 for x, y in zip(lams, lams[1:]))


def test_sign_scan_oracle_agrees():
    # brute-force dense scan of |g| for the smallest root in (0.05, 1)
    w = 1.4 * math.pi
    grid = np.linspace(0.05, 0.999, 400_001)
    g = characteristic(grid, w)
    i = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0][0]
    assert corner_exponent_2d(w) == pytest.approx(grid[i], abs=3e-6)


def test_kappa_from_eta():
    assert kappa_from_eta(0.909, 1) == pytest.approx(2 ** (-2 / 0.909))
    assert kappa_from_eta(5.0, 1) == 0.5
    with pytest.raises(NonPositiveA):
        kappa_from_eta(0.0, 1)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 10.0), st.floats(0.05, 10.0), st.integers(1, 4))
def test_kappa_monotone_and_bounded(a1, a2, k):
    lo, hi = sorted((a1, a2))
    assert kappa_from_eta(lo, k) <= kappa_from_eta(hi, k) <= 0.5


def test_on_axis_default_and_override():
    e = eta_for_vertex(VertexKind.ON_AXIS, 0.75 * math.pi)
    assert e.omega == 0.711 and e.source is ExponentSource.DEFAULT
    assert e.eta == pytest.approx(1.211, abs=1e-15)
    with pytest.raises(MissingOnAxisOmega):
        eta_for_vertex(VertexKind.ON_AXIS, 0.5 * math.pi)
    e = eta_for_vertex(VertexKind.ON_AXIS, 0.5 * math.pi, override_omega=2.0)
    assert e.eta == 2.5 and e.source is ExponentSource.USER_SUPPLIED
    e = eta_for_vertex(VertexKind.OFF_AXIS, 1.05 * math.pi)
    assert e.eta == e.omega and e.source is ExponentSource.COMPUTED_2D


def test_auto_kappas_builtins():
    k1, (e1,) = auto_kappas(builtin_domain("omega1"), 1)
    assert k1 == {3: pytest.approx(kappa_from_eta(0.95 * ORACLE[1.05], 1))}
    assert e1.eta == pytest.approx(ORACLE[1.05], abs=1e-10)
    k2, (e2,) = auto_kappas(builtin_domain("omega2"), 1)
    assert k2[0] == pytest.approx(2 ** (-2 / (0.95 * 1.211)))
    assert max(k1.values()) <= 0.5 and max(k2.values()) <= 0.5


def test_vertex_exponents_with_overrides():
    dom = builtin_domain("omega1")
    exps = vertex_exponents(dom, {0: 1.5, 4: 1.5})
    assert [e.vertex_index for e in exps] == list(dom.corners)
    assert exps[0].eta == 2.0
    with pytest.raises(MissingOnAxisOmega):
        vertex_exponents(dom)
