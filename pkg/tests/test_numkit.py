import numpy as np
import pytest

from hypolog import numkit
from hypolog.errors import InvalidInput, SingularMatrix


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return numkit.hermitian_part(a)


def test_eig_identity():
    spec = numkit.eig_hermitian(np.eye(3, dtype=complex))
    assert np.allclose(spec.eigenvalues, [1, 1, 1])


def test_eig_diagonal_sorted_ascending():
    spec = numkit.eig_hermitian(np.diag([2.0, 1.0]).astype(complex))
    assert np.allclose(spec.eigenvalues, [1.0, 2.0])
    # eigenvectors are the swapped standard basis
    assert np.allclose(np.abs(spec.eigenvectors), [[0, 1], [1, 0]])


def test_eig_reconstruction_random():
    for seed in range(5):
        a = random_hermitian(6, seed)
        spec = numkit.eig_hermitian(a)
        scale = np.linalg.norm(a, 2)
        assert np.linalg.norm(spec.reconstruct() - a, 2) < 1e-10 * max(scale, 1)
        u = spec.eigenvectors
        assert np.abs(u.conj().T @ u - np.eye(6)).max() < 1e-10


def test_eig_rejects_nonfinite():
    bad = np.array([[np.nan, 0], [0, 1]], dtype=complex)
    with pytest.raises(InvalidInput):
        numkit.eig_hermitian(bad)


def test_matrix_function_exp_zero():
    assert np.allclose(numkit.matrix_function(np.zeros((3, 3)), "exp"), np.eye(3))


def test_matrix_function_log_diagonal():
    a = np.diag([np.e, np.e**2]).astype(complex)
    assert np.allclose(numkit.matrix_function(a, "log"), np.diag([1.0, 2.0]))


def test_power_semigroup():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = b @ b.conj().T + 0.1 * np.eye(4)
    prod = (numkit.matrix_function(rho, "power", 0.3)
            @ numkit.matrix_function(rho, "power", 0.7))
    assert np.abs(prod - rho).max() < 1e-9


def test_log_of_singular_raises():
    with pytest.raises(SingularMatrix):
        numkit.matrix_function(np.diag([1.0, 0.0]).astype(complex), "log")
    with pytest.raises(SingularMatrix):
        numkit.matrix_function(np.diag([1.0, 0.0]).astype(complex), "power", 0.5)


def test_exp_log_roundtrip():
    # float64 cap: log(exp(a)) loses the small eigenspace once
    # cond(exp a) = e^width approaches 1/eps, so the width stays <= 16
    for seed in range(4):
        a = random_hermitian(5, seed)
        a = a / max(np.abs(np.linalg.eigvalsh(a)).max(), 1.0) * 8.0
        back = numkit.matrix_function(numkit.matrix_function(a, "exp"), "log")
        assert np.abs(back - a).max() < 1e-8


def test_min_eigenvalue_basics():
    assert numkit.min_eigenvalue(np.eye(4)) == pytest.approx(1.0)
    assert numkit.min_eigenvalue(np.diag([-1.0, 5.0])) == pytest.approx(-1.0)


def test_gram_matrices_are_psd():
    rng = np.random.default_rng(9)
    for _ in range(10):
        a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        assert numkit.min_eigenvalue(a.conj().T @ a) >= -1e-12


def test_min_eigenvalue_shift_identity():
    rng = np.random.default_rng(17)
    a = random_hermitian(5, 21)
    for t in rng.standard_normal(5) * 3:
        shifted = numkit.min_eigenvalue(a + t * np.eye(5))
        assert shifted == pytest.approx(numkit.min_eigenvalue(a) + t, abs=1e-10)
