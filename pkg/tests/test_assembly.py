import numpy as np
import pytest

from axistokes.assembly import accumulate, assemble_forms, assemble_system, pressure_mass_matrix
from axistokes.spaces import build_space


@pytest.fixture(scope="module")
def space(square_hierarchy):
    return build_space(square_hierarchy[2], 1)


@pytest.fixture(scope="module")
def forms(space):
    return assemble_forms(space, lambda r, z: (np.ones_like(r), np.ones_like(r)))


def _interp(sp, f):
    return sp.interpolate(f)


def test_velocity_blocks_exact_on_polynomials(space, forms):
    V = space.velocity
    u, v = _interp(V, lambda r, z: r ** 2), _interp(V, lambda r, z: r)
    # int (2r * 1 + r^2 * r / r^2) r dr dz over the unit square = int 3 r^2 = 1
    assert u @ forms.A_rr @ v == pytest.approx(1.0, rel=1e-12)
    w, s = _interp(V, lambda r, z: z ** 2), _interp(V, lambda r, z: z)
    # int (2z) r = 1/2
    assert w @ forms.A_zz @ s == pytest.approx(0.5, rel=1e-12)


def test_divergence_block(space, forms):
    V, P = space.velocity, space.pressure
    one = _interp(P, lambda r, z: np.ones_like(r))
    # (r, -2z) is divergence free in the axisymmetric sense
    ur, uz = _interp(V, lambda r, z: r), _interp(V, lambda r, z: -2 * z)
    np.testing.assert_allclose(forms.B_r @ ur + forms.B_z @ uz, 0.0, atol=1e-13)
    # u = (r^2, 0), q = 1: -int (2r + r) r = -1
    assert one @ (forms.B_r @ _interp(V, lambda r, z: r ** 2)) == pytest.approx(-1.0, rel=1e-12)
    # u = (0, z), q = r: -int r * 1 * r = -1/3
    q = _interp(P, lambda r, z: r)
    assert q @ (forms.B_z @ _interp(V, lambda r, z: z)) == pytest.approx(-1 / 3, rel=1e-12)


def test_mean_vector_and_load(space, forms):
    assert forms.c.sum() == pytest.approx(0.5, rel=1e-13)
    assert forms.F_r.sum() == pytest.approx(0.5, rel=1e-13)
    assert forms.F_z.sum() == pytest.approx(0.5, rel=1e-13)


def test_exact_symmetry(space):
    sys = assemble_system(space, lambda r, z: (r, z))
    A = sys.A
    assert (A != A.T).nnz == 0
    assert (sys.K != sys.K.T).nnz == 0
    # positive on free velocity dofs
    x = np.random.default_rng(0).standard_normal(A.shape[0]) * space.velocity_free
    assert x @ A @ x > 0


def test_assembly_bitwise_deterministic(space):
    f = lambda r, z: (np.sin(r), np.cos(z))  # noqa: E731
    a = assemble_system(space, f)
    b = assemble_system(space, f)
    assert np.array_equal(a.K.data, b.K.data) and np.array_equal(a.K.indices, b.K.indices)
    assert np.array_equal(a.rhs, b.rhs)


def test_system_shape_and_constraint(space):
    sys = assemble_system(space)
    nf = int(space.velocity_free.sum())
    assert sys.K.shape == (nf + space.n_pressure + 1,) * 2
    red = sys.without_mean_constraint()
    assert red.K.shape == (nf + space.n_pressure,) * 2
    np.testing.assert_array_equal(sys.K[-1, nf:nf + space.n_pressure].toarray().ravel(), sys.c)


def test_lift_enters_rhs(space):
    sys = assemble_system(space, lift=lambda r, z: (r, -2 * z))
    ur, uz, _ = sys.split(np.zeros(sys.K.shape[0]))
    x = space.velocity.dof_coords
    bd = space.velocity.dof_on_gamma
    np.testing.assert_array_equal(ur[bd], x[bd, 0])
    np.testing.assert_array_equal(uz[bd], -2 * x[bd, 1])
    assert np.all(ur[space.velocity.dof_on_gamma0] == 0)


def test_accumulate_sums_duplicates():
    M = accumulate(np.array([0, 1, 0, 1]), np.array([0, 1, 0, 0]), np.array([1.0, 2.0, 3.0, 4.0]), (2, 2))
    np.testing.assert_array_equal(M.toarray(), [[4.0, 0.0], [4.0, 2.0]])


def test_pressure_mass_matrix(space):
    M = pressure_mass_matrix(space)
    one = np.ones(space.n_pressure)
    assert one @ M @ one == pytest.approx(0.5, rel=1e-13)
    q = _interp(space.pressure, lambda r, z: z)
    assert q @ M @ q == pytest.approx(1 / 6, rel=1e-12)


def test_dump_coo(space, tmp_path):
    sys = assemble_system(space)
    p = sys.dump_coo(tmp_path / "K.txt")
    head = p.read_text().splitlines()[0].split()
    assert int(head[-1]) == sys.K.nnz
    assert np.loadtxt(tmp_path / "K.rhs.txt").shape == sys.rhs.shape
