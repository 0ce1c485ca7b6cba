import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axistokes.domain import builtin_domain
from axistokes.interp import EDGE, TRIANGLE, assign_nodes, interpolate_minus, interpolate_plus, project_nodewise
from axistokes.mesh import GAMMA, GAMMA0, GradingPlan, build_hierarchy
from axistokes.norms import Poly2D
from axistokes.spaces import LagrangeSpace, build_space

OPERATORS = (interpolate_plus, interpolate_minus, project_nodewise)


@pytest.fixture(scope="module")
def meshes():
    out = {}
    for name, kappa in (("unit_square", 0.5), ("omega1", 0.2), ("omega2", 0.3)):
        dom = builtin_domain(name)
        plan = GradingPlan.uniform(dom, kappa) if dom.marked_vertex is None else \
            GradingPlan.single(dom.marked_vertex, kappa)
        out[name] = build_hierarchy(dom, plan, 2, enforce_edge_bound=False)[2]
    return out


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["unit_square", "omega1", "omega2"]), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_polynomial_invariance(meshes, name, k, seed):
    mesh = meshes[name]
    space = LagrangeSpace(mesh, k)
    v = Poly2D.random(k, seed)
    x = space.dof_coords
    exact = v(x[:, 0], x[:, 1])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for op in OPERATORS:
            np.testing.assert_allclose(op(v, space), exact, atol=1e-12 * max(1.0, np.abs(exact).max()))


def test_assignment_structure(meshes):
    space = LagrangeSpace(meshes["omega2"], 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        plus = assign_nodes(space, "plus")
        minus = assign_nodes(space, "minus")
    mesh = space.mesh
    on_g, on_g0 = space.dof_on_gamma, space.dof_on_gamma0
    # wall nodes use wall edges in both operators
    assert np.all(plus.region_kind[on_g] == EDGE)
    assert np.all(mesh.edge_tags[plus.edge[on_g]] == GAMMA)
    # axis nodes: triangles (plus) or unweighted axis edges (minus)
    axis_only = on_g0 & ~on_g
    assert np.all(plus.region_kind[axis_only] == TRIANGLE)
    assert np.all(minus.region_kind[on_g0] == EDGE)
    assert np.all(mesh.edge_tags[minus.edge[on_g0]] == GAMMA0)
    assert not minus.weighted[on_g0].any() and minus.weighted[~on_g0].all()
    interior = ~(on_g | on_g0)
    assert np.all(plus.region_kind[interior] == TRIANGLE)
    # the assigned triangle contains the node
    for i in np.nonzero(interior)[0][:50]:
        assert i in space.cell_dofs[plus.triangle[i]]
    with pytest.raises(ValueError):
        assign_nodes(space, "sideways")


def test_boundary_values_preserved(meshes):
    space = LagrangeSpace(meshes["omega1"], 2)
    wall_zero = lambda r, z: r * (1 - z) * np.sin(3 * r * z)  # noqa: E731  (nonzero on the wall)
    # vanishes on the axis but not on the wall
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        c = interpolate_minus(wall_zero, space)
    assert np.all(c[space.dof_on_gamma0] == 0.0)
    # zero boundary values: plus keeps the wall values, minus all boundary values
    dom = builtin_domain("unit_square")
    sq = build_hierarchy(dom, GradingPlan.uniform(dom, 0.5), 2, enforce_edge_bound=False)[2]
    s2 = LagrangeSpace(sq, 2)
    bubble = lambda r, z: r * (1 - r) * z * (1 - z) * np.exp(r + z)  # noqa: E731
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        assert np.all(interpolate_plus(bubble, s2)[s2.dof_on_gamma] == 0.0)
        assert np.all(interpolate_minus(bubble, s2)[s2.dof_on_boundary] == 0.0)


def test_taylor_hood_component_selection(meshes):
    th = build_space(meshes["unit_square"], 1)
    v = Poly2D.random(1, 3)
    warnings.simplefilter("ignore", RuntimeWarning)
    assert interpolate_plus(v, th).shape == (th.n_velocity,)
    assert interpolate_plus(v, th, k=1).shape == (th.n_pressure,)
    assert project_nodewise(v, th, k=3).shape == (LagrangeSpace(th.mesh, 3).n_dofs,)


def test_relaxed_nodes_are_flagged():
    # on the coarse unit square every wall edge touches the axis or every
    # triangle touches it; the operator must still run and warn
    dom = builtin_domain("unit_square")
    mesh = build_hierarchy(dom, GradingPlan.uniform(dom, 0.5), 0, enforce_edge_bound=False)[0]
    space = LagrangeSpace(mesh, 1)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        a = assign_nodes(space, "plus")
    assert a.relaxed.any() == any(issubclass(w.category, RuntimeWarning) for w in rec)
    x = space.dof_coords
    np.testing.assert_allclose(interpolate_plus(lambda r, z: 2 * r - z, space), 2 * x[:, 0] - x[:, 1],
                               atol=1e-13)
