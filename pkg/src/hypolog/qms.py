"""Transferred Lindblad generators and their quantum Markov semigroups.

The generator on m x m matrices (optionally amplified by a factor id_n) is
the double-commutator form

    L(rho) = [X, [X, rho]] + [Y, [Y, rho]],    X = X_m ⊗ I_n,  Y = Y_m ⊗ I_n,

with skew-Hermitian X, Y.  With this convention L is self-adjoint and
negative semidefinite for the trace inner product <a,b> = tr(a†b), i.e.
dissipative (equivalently L(rho) = -Σ [a,[a,rho]] with Hermitian
a = -iX), annihilates the trace, and generates a completely positive
trace-preserving semigroup S_t = e^{tL}.

Superoperators are materialized as dense d²xd² matrices in the
column-stacking basis (matrix unit e_{jk} -> index (k-1)d + j, i.e.
numpy ``reshape(order='F')``), and exponentiated spectrally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGenerator, InvalidInput
from .numkit import hermitian_part, min_eigenvalue
from .su2repr import IrrepGenerators


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(a, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class DensityMatrix:
    """PSD, trace-one matrix; the state space of the semigroup."""

    matrix: np.ndarray
    psd_tol: float = 1e-10

    def __post_init__(self):
        m = hermitian_part(self.matrix)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > 1e-10:
            raise InvalidInput(f"trace {tr!r} is not 1 within 1e-10")
        if min_eigenvalue(m) < -self.psd_tol:
            raise InvalidInput(
                f"not PSD: min eigenvalue {min_eigenvalue(m):.3e}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def from_unnormalized(a: np.ndarray) -> "DensityMatrix":
        a = hermitian_part(a)
        return DensityMatrix(a / np.trace(a).real)

    @staticmethod
    def maximally_mixed(dim: int) -> "DensityMatrix":
        return DensityMatrix(np.eye(dim, dtype=complex) / dim)

    @staticmethod
    def random(dim: int, seed, min_eig: float = 0.0) -> "DensityMatrix":
        """Random strictly positive state (Wishart plus optional floor)."""
        from .su2repr import flatten_seed
        rng = np.random.default_rng(flatten_seed(seed))
        a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        w = a @ a.conj().T + min_eig * dim * np.eye(dim)
        return DensityMatrix.from_unnormalized(w)


@dataclass
class Superoperator:
    """Linear map on d x d matrices stored as a d²xd² matrix
    (column-stacking basis)."""

    dim: int
    matrix: np.ndarray
    _spec: tuple[np.ndarray, np.ndarray] | None = field(
        default=None, repr=False, compare=False)

    def __post_init__(self):
        d2 = self.dim * self.dim
        if self.matrix.shape != (d2, d2):
            raise InvalidInput(
                f"superoperator matrix shape {self.matrix.shape} != ({d2},{d2})")
        self.matrix = np.ascontiguousarray(self.matrix, dtype=complex)
        self.matrix.flags.writeable = False

    def apply(self, a: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(a), self.dim)

    def is_selfadjoint(self, atol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= atol)

    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigendecomposition as a Hermitian matrix (cached)."""
        if self._spec is None:
            w, u = np.linalg.eigh(hermitian_part(self.matrix))
            self._spec = (w, u)
        return self._spec


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def amplified_directions(gen: IrrepGenerators, n: int) -> tuple[np.ndarray, np.ndarray]:
    """The horizontal directions X_m ⊗ I_n, Y_m ⊗ I_n."""
    if n < 1:
        raise InvalidInput(f"amplification must be >= 1, got {n}")
    if n == 1:
        return gen.X, gen.Y
    eye = np.eye(n)
    return np.kron(gen.X, eye), np.kron(gen.Y, eye)


def apply_generator(gen: IrrepGenerators, rho: np.ndarray, n: int = 1) -> np.ndarray:
    """L(rho) by direct commutator arithmetic (no superoperator needed)."""
    out = np.zeros_like(np.asarray(rho, dtype=complex))
    for a in amplified_directions(gen, n):
        out += commutator(a, commutator(a, rho))
    return out


def lindblad_generator(gen: IrrepGenerators, n: int = 1) -> Superoperator:
    """Materialize L = Σ [a, [a, ·]] over a in {X_m⊗I_n, Y_m⊗I_n}.

    Uses vec(A rho B) = (B^T ⊗ A) vec(rho):
    [a,[a,rho]] = a²rho - 2 a rho a + rho a².
    """
    d = gen.m * n
    eye = np.eye(d)
    mat = np.zeros((d * d, d * d), dtype=complex)
    for a in amplified_directions(gen, n):
        a2 = a @ a
        mat += np.kron(eye, a2) + np.kron(a2.T, eye) - 2.0 * np.kron(a.T, a)
    return Superoperator(dim=d, matrix=mat)


def semigroup(L: Superoperator, t: float) -> Superoperator:
    """The channel e^{tL} as a superoperator (spectral exponential)."""
    if t < 0:
        raise InvalidInput(f"time must be >= 0, got {t}")
    w, u = L.spectrum()
    mat = (u * np.exp(t * w)) @ u.conj().T
    return Superoperator(dim=L.dim, matrix=mat)


def evolve(L: Superoperator, rho: DensityMatrix, t: float) -> DensityMatrix:
    """S_t(rho) = e^{tL}(rho); trace preserved, positivity within 1e-9."""
    if t < 0:
        raise InvalidInput(f"time must be >= 0, got {t}")
    if rho.dim != L.dim:
        raise InvalidInput(f"dimension mismatch: rho {rho.dim}, L {L.dim}")
    w, u = L.spectrum()
    v = u @ (np.exp(t * w) * (u.conj().T @ vec(rho.matrix)))
    out = hermitian_part(unvec(v, L.dim))
    return DensityMatrix(out, psd_tol=1e-9)


def fixed_point_projection(L: Superoperator, kernel_tol: float = 1e-9) -> Superoperator:
    """Spectral projection E onto ker(L).

    For the bare irreducible generator this is rho -> tr(rho)·I/m; for the
    n-amplified generator it is rho -> (I_m/m) ⊗ tr_1(rho).  E is
    idempotent, self-adjoint, and commutes with L.
    """
    w, u = L.spectrum()
    scale = max(1.0, float(np.max(np.abs(w))))
    cols = u[:, np.abs(w) <= kernel_tol * scale]
    return Superoperator(dim=L.dim, matrix=cols @ cols.conj().T)


def partial_trace_first(rho: np.ndarray, m: int, n: int) -> np.ndarray:
    """Trace out the first (m-dimensional) tensor factor of an mn x mn matrix."""
    r = np.asarray(rho, dtype=complex).reshape(m, n, m, n)
    return np.einsum("jrjs->rs", r)


def verify_cp(L: Superoperator, t: float) -> dict:
    """Choi-matrix report for the channel e^{tL}.

    Returns {"choi_min_eig", "trace_defect"}; for a Lindblad-form
    generator choi_min_eig >= -1e-9 and trace_defect < 1e-10 are expected.
    This is a report, not an assertion.
    """
    if t <= 0:
        raise InvalidInput(f"time must be > 0, got {t}")
    d = L.dim
    st = semigroup(L, t)
    choi = np.zeros((d * d, d * d), dtype=complex)
    trace_defect = 0.0
    for j in range(d):
        for k in range(d):
            ejk = np.zeros((d, d), dtype=complex)
            ejk[j, k] = 1.0
            out = st.apply(ejk)
            choi += np.kron(ejk, out)
            trace_defect = max(trace_defect,
                               abs(np.trace(out) - (1.0 if j == k else 0.0)))
    return {
        "choi_min_eig": min_eigenvalue(choi),
        "trace_defect": float(trace_defect),
    }


def spectral_gap(L: Superoperator, kernel_tol: float = 1e-9) -> float:
    """Smallest nonzero eigenvalue magnitude of -L.

    Raises DegenerateGenerator when the kernel is the whole space (zero
    generator) or its dimension disagrees with the fixed-point projection
    rank.
    """
    w, _ = L.spectrum()
    scale = max(1.0, float(np.max(np.abs(w))))
    kernel = np.abs(w) <= kernel_tol * scale
    nonzero = -w[~kernel]
    if nonzero.size == 0:
        raise DegenerateGenerator("zero generator: no nonzero spectrum")
    e = fixed_point_projection(L, kernel_tol)
    rank = int(round(float(np.trace(e.matrix).real)))
    if rank != int(np.sum(kernel)):
        raise DegenerateGenerator(
            f"kernel dimension {int(np.sum(kernel))} != projection rank {rank}")
    return float(np.min(nonzero))
