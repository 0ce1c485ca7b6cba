import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from axistokes.domain import builtin_domain
from axistokes.errors import LevelMismatch, NotNested, RegionOutsideNeighborhood, UnsupportedSpec
from axistokes.mesh import GradingPlan, build_hierarchy
from axistokes.norms import (ErrorField, FunctionField, NormKind, NormSpec, Poly2D, RateTable,
                             convergence_rates, dilation_scaling_check, inv_r_norm, level_errors, prolong,
                             rates_with_floor, theta, weighted_norm)
from axistokes.spaces import DiscreteField, LagrangeSpace


@pytest.fixture(scope="module")
def sq(square_hierarchy):
    return square_hierarchy[2]


def test_polynomial_norms_on_unit_square(sq):
    r = Poly2D({(1, 0): 1.0})
    r2 = Poly2D({(2, 0): 1.0})
    # int r^3 + int r + int r (1/r weight) = 1/4 + 1/2 + 1/2
    assert weighted_norm(r, sq, NormSpec(NormKind.H1_MINUS)) == pytest.approx(math.sqrt(1.25), rel=1e-13)
    assert weighted_norm(r, sq, NormSpec(NormKind.H1_1)) == pytest.approx(math.sqrt(0.75), rel=1e-13)
    # r^2 in H^2_+: 1/6 + 1 + 2 + (extra) 2
    assert weighted_norm(r2, sq, NormSpec(NormKind.H1_PLUS, m=2)) == pytest.approx(math.sqrt(31 / 6),
                                                                                 rel=1e-13)
    assert inv_r_norm(r, sq) == pytest.approx(math.sqrt(0.5), rel=1e-13)
    assert weighted_norm(lambda a, b: np.ones_like(a), sq, NormSpec("L2_1")) == pytest.approx(math.sqrt(0.5))


def test_h1_is_l2_plus_seminorm(sq):
    v = Poly2D.random(3, 11)
    h1 = weighted_norm(v, sq, NormSpec("H1_1"), squared=True)
    l2 = weighted_norm(v, sq, NormSpec("L2_1"), squared=True)
    semi = sum(weighted_norm(v.derivative(i, j), sq, NormSpec("L2_1"), squared=True)
               for i, j in ((1, 0), (0, 1)))
    assert h1 == pytest.approx(l2 + semi, rel=1e-12)


def test_discrete_field_norm_matches_polynomial(sq):
    v = Poly2D.random(2, 5)
    S = LagrangeSpace(sq, 2)
    f = DiscreteField(S, S.interpolate(v))
    for kind in ("L2_1", "H1_1", "H1_minus"):
        assert weighted_norm(f, sq, NormSpec(kind)) == pytest.approx(weighted_norm(v, sq, NormSpec(kind)),
                                                                     rel=1e-11)
    assert weighted_norm(ErrorField(v, f), sq, NormSpec("H1_1")) < 1e-12


def test_k_norm_against_scipy(square_hierarchy, unit_square):
    mesh = square_hierarchy[4]
    spec = NormSpec.for_domain(unit_square, NormKind.KMU1, m=0, mu=-1.0)
    got = weighted_norm(Poly2D({(0, 0): 1.0}), mesh, spec, squared=True)
    verts = unit_square.vertices

    # independent oracle: adaptive quadrature on each quarter of the square,
    # where theta is the distance to a single corner capped at 1/2
    ref = 0.0
    for (r0, r1), flip_r in (((0, 0.5), False), ((0.5, 1), True)):
        for (z0, z1), flip_z in (((0, 0.5), False), ((0.5, 1), True)):
            def f(z, r, fr=flip_r, fz=flip_z):
                dr = 1 - r if fr else r
                dz = 1 - z if fz else z
                return min(math.hypot(dr, dz), 0.5) ** 2 * r
            ref += integrate.dblquad(f, r0, r1, z0, z1, epsabs=1e-11)[0]
    assert got == pytest.approx(ref, rel=2e-3)
    # mu = 0, m = 0 is the plain weighted L2 norm
    spec0 = NormSpec.for_domain(unit_square, NormKind.KMU1, m=0, mu=0.0)
    v = Poly2D.random(2, 2)
    assert weighted_norm(v, mesh, spec0) == pytest.approx(weighted_norm(v, mesh, NormSpec("L2_1")), rel=1e-12)


def test_theta_caps_at_radius():
    th = theta(np.array([[0.1, 0.0], [5.0, 5.0]]), np.array([[0.0, 0.0]]), 1.0)
    np.testing.assert_allclose(th, [0.1, 1.0])


def test_norm_spec_validation():
    with pytest.raises(UnsupportedSpec):
        NormSpec("W1p")
    with pytest.raises(UnsupportedSpec):
        NormSpec(NormKind.KMU1, m=1)
    with pytest.raises(UnsupportedSpec):
        NormSpec(NormKind.L2_1, m=1)
    with pytest.raises(UnsupportedSpec):
        weighted_norm(Poly2D({(0, 0): 1}), None, "L2_1")


def test_prolongation_is_exact(omega1_hierarchy, rng):
    h = omega1_hierarchy
    for k in (1, 2, 3):
        S0, S1, S3 = (LagrangeSpace(h[j], k) for j in (0, 1, 3))
        f = DiscreteField(S0, rng.standard_normal(S0.n_dofs))
        g = DiscreteField(S3, prolong(f, S3))
        tri = h[3].nodes[h[3].triangles[::7]].mean(axis=1)
        np.testing.assert_allclose(g(tri[:, 0], tri[:, 1]), f(tri[:, 0], tri[:, 1]), atol=1e-11)
        two_step = prolong(DiscreteField(S1, prolong(f, S1)), S3)
        np.testing.assert_allclose(two_step, g.coeffs, atol=1e-12)


def test_prolongation_rejects_unrelated_meshes(omega1_hierarchy, square_hierarchy):
    f = DiscreteField(LagrangeSpace(square_hierarchy[1], 1), np.zeros(LagrangeSpace(square_hierarchy[1], 1).n_dofs))
    with pytest.raises(NotNested):
        prolong(f, LagrangeSpace(omega1_hierarchy[2], 1))
    with pytest.raises(NotNested):
        prolong(f, LagrangeSpace(square_hierarchy[2], 2))


def test_convergence_rates():
    r = convergence_rates([1.0, 0.25, 0.0625, 0.0])
    assert math.isnan(r[0]) and math.isnan(r[3])
    np.testing.assert_allclose(r[1:3], 2.0)
    r = rates_with_floor([1.0, 0.5, 1e-20], [0.0, 0.0, 1e-12])
    assert r[1] == pytest.approx(1.0) and math.isnan(r[2])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(1e-300, 1e300, allow_nan=False), min_size=0, max_size=8))
def test_rate_table_roundtrip(errors):
    t = RateTable(levels=list(range(1, len(errors) + 1)), error_u=list(errors),
                  rate_u=[float(x) for x in convergence_rates(errors)],
                  error_p=[2 * e for e in errors], rate_p=[float(x) for x in convergence_rates(errors)])
    assert RateTable.from_csv(t.to_csv()) == t
    md = RateTable.from_markdown(t.to_markdown())
    assert md.levels == t.levels
    np.testing.assert_allclose(md.error_u, t.error_u, rtol=1e-8)


def test_empty_rate_table_is_header_only():
    t = RateTable()
    assert t.to_csv().strip() == "level,error_u,rate_u,error_p,rate_p"
    lines = t.to_markdown().strip().splitlines()
    assert len(lines) == 2
    assert [c.strip() for c in lines[0].strip("|").split("|")] == [
        "level", "‖u_j − u_{j−1}‖", "rate_u", "‖p_j − p_{j−1}‖", "rate_p"]


def test_level_errors_checks_alignment(omega1_hierarchy):
    with pytest.raises(LevelMismatch):
        level_errors(omega1_hierarchy, [])


def test_dilation_identity_example():
    dom = builtin_domain("omega2")
    q = dom.vertices[0]
    G = np.array([[q + (0.01, 0.0), q + (0.1, 0.05), q + (0.05, 0.1)]])
    v = Poly2D.random(3, 4)
    n1, n2 = dilation_scaling_check(v, G, 0.5, 2, 1.3, dom, 0)
    assert n2 / n1 == pytest.approx(0.5 ** (1.3 - 1.5), rel=1e-10)
    a1, a2 = dilation_scaling_check(v, G, 0.5, 2, 1.3, dom, 0, weight="inv_r")
    assert a2 / a1 == pytest.approx(0.5 ** -0.5, rel=1e-10)


def test_dilation_region_must_stay_near_vertex():
    dom = builtin_domain("omega2")
    q = dom.vertices[0]
    G = np.array([[q + (0.01, 0.0), q + (0.3, 0.05), q + (0.05, 0.3)]])
    with pytest.raises(RegionOutsideNeighborhood):
        dilation_scaling_check(Poly2D({(0, 0): 1}), G, 0.25, 1, 1.0, dom, 0)
    with pytest.raises(ValueError):
        dilation_scaling_check(Poly2D({(0, 0): 1}), G, 1.5, 1, 1.0, dom, 0)


def test_function_field_derivatives():
    f = FunctionField(np.sin, {(1, 0): lambda r, z: np.cos(r)})
    assert f.derivative(1, 0)(0.0, 0.0) == 1.0
    with pytest.raises(UnsupportedSpec):
        f.derivative(0, 1)


def test_level_errors_on_exact_data_floor(square_hierarchy):
    from axistokes.assembly import assemble_system
    from axistokes.solver import solve_saddle
    from axistokes.spaces import build_space

    meshes = square_hierarchy.meshes[:3]
    sols = [solve_saddle(assemble_system(build_space(m, 1), lambda r, z: (np.ones_like(r), np.ones_like(r)),
                                         lift=lambda r, z: (r, -2 * z)), rel_tol=1e-12) for m in meshes]
    table = level_errors(meshes, sols, rel_floor=1e-8)
    assert max(table.error_u) < 1e-9
    assert all(math.isnan(x) for x in table.rate_u + table.rate_p)
    dom = builtin_domain("unit_square")
    h = build_hierarchy(dom, GradingPlan.uniform(dom, 0.5), 1, enforce_edge_bound=False)
    with pytest.raises(LevelMismatch):
        level_errors(h, sols[:2])
