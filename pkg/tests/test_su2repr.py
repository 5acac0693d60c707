import numpy as np
import pytest

from hypolog import su2repr
from hypolog.errors import InvalidInput

# the defining 2x2 skew-Hermitian matrices
X2 = np.array([[0, 1], [-1, 0]], dtype=complex)
Y2 = np.array([[0, 1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1j, 0], [0, -1j]], dtype=complex)


def test_m2_matches_defining_matrices():
    gen = su2repr.build_generators(2)
    assert np.array_equal(gen.X, X2)
    assert np.array_equal(gen.Y, Y2)
    assert np.array_equal(gen.Z, Z2)


def test_m1_is_trivial():
    gen = su2repr.build_generators(1)
    for a in gen.as_tuple():
        assert np.array_equal(a, np.zeros((1, 1)))
    assert np.array_equal(su2repr.casimir(gen), np.zeros((1, 1)))


def test_invalid_dimension():
    with pytest.raises(InvalidInput):
        su2repr.build_generators(0)


@pytest.mark.parametrize("m", range(1, 9))
def test_brackets_skewness_casimir(m):
    gen = su2repr.build_generators(m)
    x, y, z = gen.as_tuple()
    for a in (x, y, z):
        assert np.abs(a + a.conj().T).max() <= 1e-12
    assert np.abs(x @ y - y @ x - 2 * z).max() <= 1e-10
    assert np.abs(y @ z - z @ y - 2 * x).max() <= 1e-10
    assert np.abs(z @ x - x @ z - 2 * y).max() <= 1e-10
    assert np.abs(su2repr.casimir(gen) + (m * m - 1) * np.eye(m)).max() <= 1e-10


def test_casimir_values():
    assert np.allclose(su2repr.casimir(su2repr.build_generators(2)),
                       -3 * np.eye(2))
    assert np.allclose(su2repr.casimir(su2repr.build_generators(3)),
                       -8 * np.eye(3))


@pytest.mark.parametrize("m,expected", [
    (1, [0]),
    (2, [-2, -2]),
    (3, [-4, -8, -4]),
])
def test_horizontal_symbol_diagonal(m, expected):
    gen = su2repr.build_generators(m)
    h = su2repr.horizontal_symbol(gen)
    assert np.abs(h - np.diag(expected)).max() <= 1e-10
    assert np.array_equal(su2repr.horizontal_eigenvalues(m), expected)


def test_horizontal_symbol_formula_and_z_commutation():
    for m in range(1, 9):
        gen = su2repr.build_generators(m)
        h = su2repr.horizontal_symbol(gen)
        j = np.arange(1, m + 1)
        assert np.abs(np.diag(h).real - (-(m * m - 1) + (m - 2 * j + 1) ** 2)).max() <= 1e-10
        assert np.abs(h @ gen.Z - gen.Z @ h).max() <= 1e-10


def test_represent_identity():
    for m in (1, 2, 5):
        gen = su2repr.build_generators(m)
        assert np.allclose(su2repr.represent(gen, su2repr.IDENTITY), np.eye(m))


def test_represent_m2_equals_quaternion_matrix():
    gen = su2repr.build_generators(2)
    for g in su2repr.haar_sample(123, 25):
        direct = g.c * np.eye(2) + g.x * X2 + g.y * Y2 + g.z * Z2
        assert np.abs(su2repr.represent(gen, g) - direct).max() < 1e-10


def test_represent_minus_identity():
    g = su2repr.GroupElement(-1.0, 0.0, 0.0, 0.0)
    for m in (2, 3, 4):
        gen = su2repr.build_generators(m)
        u = su2repr.represent(gen, g)
        # the center acts by the parity scalar (-1)^(m-1)
        assert np.abs(u - (-1.0) ** (m - 1) * np.eye(m)).max() < 1e-10


def test_homomorphism_property():
    gen = su2repr.build_generators(3)
    pairs = su2repr.haar_sample(7, 20)
    for g, h in zip(pairs[:10], pairs[10:]):
        lhs = su2repr.represent(gen, su2repr.group_mul(g, h))
        rhs = su2repr.represent(gen, g) @ su2repr.represent(gen, h)
        assert np.abs(lhs - rhs).max() < 1e-8


def test_inverse_property():
    for m in range(2, 7):
        gen = su2repr.build_generators(m)
        for g in su2repr.haar_sample(100 + m, 100):
            u = su2repr.represent(gen, g) @ su2repr.represent(gen, su2repr.group_inv(g))
            assert np.abs(u - np.eye(m)).max() < 1e-8


def test_trace_is_real():
    for m in (2, 3, 5):
        gen = su2repr.build_generators(m)
        for g in su2repr.haar_sample(m, 50):
            assert abs(np.trace(su2repr.represent(gen, g)).imag) < 1e-8


def test_haar_sample_normalized_and_deterministic():
    pts = su2repr.haar_sample(5, 100)
    for g in pts:
        assert abs(g.c**2 + g.x**2 + g.y**2 + g.z**2 - 1.0) <= 1e-12
    again = su2repr.haar_sample(5, 100)
    assert all(a == b for a, b in zip(pts, again))
    assert su2repr.haar_sample(6, 1)[0] != pts[0]


def test_haar_mean_of_c_coordinate():
    pts = su2repr.haar_sample(2024, 100_000)
    mean_c = np.mean([g.c for g in pts])
    assert -0.01 <= mean_c <= 0.01


def test_haar_schur_orthogonality_entry_mean():
    # nontrivial irrep entries integrate to 0: entry (1,1) of the m=2 rep
    pts = su2repr.haar_sample(99, 100_000)
    vals = np.array([g.c + 1j * g.z for g in pts])  # pi_2(g)[0,0]
    se = vals.std() / np.sqrt(len(vals))
    assert abs(vals.mean()) <= 3 * se


def test_group_exp_step():
    g = su2repr.haar_sample(1, 1)[0]
    stepped = su2repr.group_exp_step(g, "X", 0.3)
    gen = su2repr.build_generators(2)
    expected = su2repr.represent(gen, g) @ (
        np.cos(0.3) * np.eye(2) + np.sin(0.3) * X2)
    assert np.abs(su2repr.represent(gen, stepped) - expected).max() < 1e-10


def test_flatten_seed():
    assert su2repr.flatten_seed(5) == (5,)
    assert su2repr.flatten_seed((1, (2, 3), 4)) == (1, 2, 3, 4)
