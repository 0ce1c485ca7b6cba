import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axistokes.domain import (BUILTIN_NAMES, VertexKind, build_domain, builtin_domain, interior_angle,
                              load_domain)
from axistokes.errors import EmptyAxisContact, NegativeRadius, NonSimplePolygon


def test_unit_square_classification():
    d = builtin_domain("unit_square")
    assert d.gamma0_edges == (3,)
    assert d.corners == (0, 1, 2, 3)
    np.testing.assert_allclose(d.interior_angles, math.pi / 2, atol=1e-15)
    assert [k is VertexKind.ON_AXIS for k in d.vertex_kinds] == [True, False, False, True]
    assert d.separation_L == pytest.approx(1.0)


def test_clockwise_input_is_reoriented():
    d = build_domain([(0, 1), (1, 1), (1, 0), (0, 0)])
    area2 = np.sum(d.vertices[:, 0] * np.roll(d.vertices[:, 1], -1)
                   - np.roll(d.vertices[:, 0], -1) * d.vertices[:, 1])
    assert area2 > 0


def test_omega1_angles():
    d = builtin_domain("omega1")
    q = d.marked_vertex
    assert interior_angle(d, q) == pytest.approx(1.05 * math.pi, abs=1e-12)
    assert d.vertex_kinds[q] is VertexKind.OFF_AXIS
    others = [a for i, a in enumerate(d.interior_angles) if i != q]
    assert max(others) <= math.pi / 2 + 1e-12
    np.testing.assert_allclose(d.vertices[q], (0.5, 1.0))


def test_omega2_angles():
    d = builtin_domain("omega2")
    q = d.marked_vertex
    assert interior_angle(d, q) == pytest.approx(0.75 * math.pi, abs=1e-12)
    assert d.vertex_kinds[q] is VertexKind.ON_AXIS
    assert math.isclose(sum(d.interior_angles), (d.n_vertices - 2) * math.pi, rel_tol=1e-13)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_angle_sum(name):
    d = builtin_domain(name)
    assert sum(d.interior_angles) == pytest.approx((d.n_vertices - 2) * math.pi, rel=1e-13)
    assert d.separation_L > 0


def test_negative_radius_rejected():
    with pytest.raises(NegativeRadius):
        build_domain([(-0.1, 0), (1, 0), (1, 1), (0, 1)])


def test_near_axis_radius_snapped():
    d = build_domain([(1e-14, 0), (1, 0), (1, 1), (-1e-14, 1)])
    assert d.vertices[0, 0] == 0.0 and d.vertices[3, 0] == 0.0
    assert d.gamma0_edges == (3,)


def test_self_intersection_rejected():
    with pytest.raises(NonSimplePolygon):
        build_domain([(0, 0), (1, 1), (1, 0), (0, 1)])


def test_degenerate_inputs_rejected():
    with pytest.raises(NonSimplePolygon):
        build_domain([(0, 0), (1, 0)])
    with pytest.raises(NonSimplePolygon):
        build_domain([(0, 0), (1, 0), (2, 0)])


def test_no_axis_contact():
    verts = [(1, 0), (2, 0), (2, 1), (1, 1)]
    with pytest.raises(EmptyAxisContact):
        build_domain(verts)
    assert build_domain(verts, allow_no_axis=True).gamma0_edges == ()
    # touching the axis at a single point is not enough
    with pytest.raises(EmptyAxisContact):
        build_domain([(0, 0), (1, -1), (1, 1)])


def test_straight_vertex_not_a_corner():
    d = build_domain([(0, 0), (1, 0), (1, 0.5), (1, 1), (0, 1)])
    assert 2 not in d.corners
    assert len(d.corners) == 4


def test_load_domain_roundtrip(tmp_path):
    d = builtin_domain("omega2")
    p = tmp_path / "dom.json"
    p.write_text(json.dumps(d.to_json()))
    e = load_domain(str(p))
    np.testing.assert_array_equal(e.vertices, d.vertices)
    assert e.gamma0_edges == d.gamma0_edges
    assert load_domain("omega1").name == "omega1"
    with pytest.raises(KeyError):
        builtin_domain("nope")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.2, 2.0), min_size=2, max_size=2), st.floats(0.1, 3.0))
def test_axis_rectangles_are_valid(size, shift):
    w, h = size
    d = build_domain([(0, shift), (w, shift), (w, shift + h), (0, shift + h)])
    assert d.gamma0_edges == (3,)
    assert d.separation_L == pytest.approx(min(w, h))
    assert all(a == pytest.approx(math.pi / 2) for a in d.interior_angles)
