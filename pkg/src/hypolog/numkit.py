"""Spectral toolkit for Hermitian matrices.

Everything downstream (semigroups, entropies, divided-difference kernels)
reduces to dense eigendecompositions of Hermitian or skew-Hermitian
matrices at dimensions of a few hundred, so this module is a thin,
uniformly-toleranced wrapper around ``numpy.linalg.eigh``.

Degeneracy policy: eigenvalues at or below ``EIGFLOOR`` (1e-12) are treated
as exact zeros for entropy purposes (0*ln 0 := 0) and as singular for
logs, inverses and non-integer powers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, SingularMatrix

#: Eigenvalues at or below this are treated as zero / singular.
EIGFLOOR = 1e-12


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Symmetrize (a + a†)/2, absorbing floating-point drift."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    ``eigenvalues`` is real ascending; column k of ``eigenvectors`` pairs
    with ``eigenvalues[k]``; U diag(w) U† reconstructs the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def eig_hermitian(a: np.ndarray) -> Spectrum:
    """Eigendecomposition of a (symmetrized) Hermitian matrix.

    Raises InvalidInput on non-finite entries.
    """
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has non-finite entries")
    w, u = np.linalg.eigh(hermitian_part(a))
    return Spectrum(eigenvalues=w, eigenvectors=u)


def matrix_function(a: np.ndarray, kind: str, s: float | None = None,
                    eigfloor: float = EIGFLOOR) -> np.ndarray:
    """Apply a scalar function spectrally: U f(diag w) U†.

    kind is one of "exp", "log", "power" (power takes the exponent ``s``).
    log and non-integer powers require all eigenvalues > eigfloor, else
    SingularMatrix is raised.
    """
    spec = eig_hermitian(a)
    w, u = spec.eigenvalues, spec.eigenvectors
    if kind == "exp":
        fw = np.exp(w)
    elif kind == "log":
        if np.min(w) <= eigfloor:
            raise SingularMatrix(
                f"log needs spectrum > {eigfloor:g}; min eigenvalue {np.min(w):.3e}")
        fw = np.log(w)
    elif kind == "power":
        if s is None:
            raise InvalidInput("power requires an exponent s")
        if s != int(s) and np.min(w) <= eigfloor:
            raise SingularMatrix(
                f"power({s}) needs spectrum > {eigfloor:g}; min eigenvalue {np.min(w):.3e}")
        fw = np.power(w.astype(complex) if np.min(w) < 0 else w, s)
    else:
        raise InvalidInput(f"unknown function tag {kind!r}")
    return (u * fw) @ u.conj().T


def min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue; the PSD witness (PSD iff >= -tol)."""
    return float(np.linalg.eigvalsh(hermitian_part(a))[0])


def is_psd(a: np.ndarray, tol: float = 1e-10) -> bool:
    return min_eigenvalue(a) >= -tol


def trace_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Trace inner product <a, b> = tr(a† b)."""
    return complex(np.vdot(a, b))


def trace_norm(a: np.ndarray) -> float:
    """Schatten 1-norm (sum of singular values)."""
    return float(np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False).sum())


def expm_skew(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a skew-Hermitian matrix via the spectral
    theorem for i·a (which is Hermitian)."""
    a = np.asarray(a, dtype=complex)
    w, u = np.linalg.eigh(1j * a)
    return (u * np.exp(-1j * w)) @ u.conj().T
