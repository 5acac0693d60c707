"""Entropy and Fisher-information functionals.

Relative entropy D(rho||sigma) = tr(rho ln rho - rho ln sigma), the
entropy-production (Fisher) functional I(rho) = -tr(L(rho) ln rho), and
the divided-difference machinery connecting them:

* ``log_mean_apply`` multiplies, in the weight's eigenbasis, by the
  logarithmic-mean kernel (lam - mu)/(ln lam - ln mu); this is the
  operator rho-weighting of the noncommutative chain rule.
* ``log_mean_inverse_apply`` uses the inverse kernel
  (ln lam - ln mu)/(lam - mu), i.e. the Fréchet derivative of ln at the
  weight: d ln(rho)[f].

With the commutator derivations d_j = [a_j, ·] (a_j skew-Hermitian) these
give two routes to the same Fisher value,

    I(rho) = -tr(L(rho) ln rho) = Σ_j <d_j rho, log_mean_inverse(d_j rho)>,

and the weighted Dirichlet operator

    K_rho(f) = -Σ_j [a_j, log_mean_apply(rho, [a_j, f])],

which satisfies K_rho(ln rho) = -L(rho) exactly.

Division policy: kernels are evaluated in the eigenbasis with an explicit
equal-eigenvalue branch at relative spacing 1e-8; eigenvalues at or below
the module-wide floor raise SingularState where strict positivity is a
precondition.  +inf is a first-class return value of relative_entropy for
support violations (optimizers must be able to rank infeasible points).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInput, SingularState
from .numkit import EIGFLOOR, hermitian_part, trace_norm
from .qms import DensityMatrix, Superoperator, amplified_directions, apply_generator, commutator
from .su2repr import IrrepGenerators


def _entropy_weights(w: np.ndarray) -> np.ndarray:
    """w*ln(w) with the 0*ln 0 := 0 convention below the eigenvalue floor."""
    out = np.zeros_like(w)
    mask = w > EIGFLOOR
    out[mask] = w[mask] * np.log(w[mask])
    return out


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix,
                     support_tol: float = 1e-10) -> float:
    """Quantum relative entropy in nats; +inf on support violation.

    Eigenvalues at or below the floor are treated as exact zeros; if rho
    places more than ``support_tol`` mass on sigma's null space the pair
    is infeasible and math.inf is returned (not raised).
    """
    if rho.dim != sigma.dim:
        raise InvalidInput(f"dimension mismatch {rho.dim} vs {sigma.dim}")
    wr, ur = np.linalg.eigh(rho.matrix)
    ws, us = np.linalg.eigh(sigma.matrix)
    null = us[:, ws <= EIGFLOOR]
    if null.shape[1] > 0:
        mass = float(np.einsum("ij,jk,ki->", null.conj().T, rho.matrix, null).real)
        if mass > support_tol:
            return math.inf
    term1 = float(np.sum(_entropy_weights(wr)))
    supp = ws > EIGFLOOR
    proj = us[:, supp]
    # tr(rho ln sigma) over sigma's support
    overlap = np.einsum("ij,jk,ki->i", proj.conj().T, rho.matrix, proj).real
    term2 = float(np.dot(overlap, np.log(ws[supp])))
    return max(term1 - term2, 0.0)


def relative_entropy_report(rho: DensityMatrix, sigma: DensityMatrix) -> dict:
    """Relative entropy plus both Pinsker-style margins.

    ``pinsker_margin`` is D - ||rho-sigma||_1²/2 (standard quadratic
    inequality, expected >= 0); ``sqrt_reading_margin`` is
    sqrt(D) - ||rho-sigma||_1²/2, the literal transcription of the
    printed square-root form, logged for comparison only.
    """
    d = relative_entropy(rho, sigma)
    tn = trace_norm(rho.matrix - sigma.matrix)
    return {
        "relative_entropy": d,
        "trace_distance": tn,
        "pinsker_margin": d - 0.5 * tn * tn,
        "sqrt_reading_margin": (math.sqrt(d) if d >= 0 else math.nan) - 0.5 * tn * tn,
    }


def gradient(gen: IrrepGenerators, rho: np.ndarray, n: int = 1) -> list[np.ndarray]:
    """Horizontal gradient ([X⊗I, rho], [Y⊗I, rho])."""
    rho = np.asarray(rho, dtype=complex)
    return [commutator(a, rho) for a in amplified_directions(gen, n)]


def _strict_spectrum(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    w, u = np.linalg.eigh(rho.matrix)
    if w[0] <= EIGFLOOR:
        raise SingularState(f"state has eigenvalue {w[0]:.3e} <= {EIGFLOOR:g}")
    return w, u


def _kernel_apply(rho: DensityMatrix, f: np.ndarray, inverse: bool) -> np.ndarray:
    """Entrywise divided-difference multiplier in rho's eigenbasis.

    Eigenvalue pairs within relative spacing 1e-8 take the equal-value
    limit 1/lam (symmetrized as 1/sqrt(lam*mu)), removing the 0/0 branch
    deterministically.
    """
    w, u = _strict_spectrum(rho)
    ft = u.conj().T @ np.asarray(f, dtype=complex) @ u
    lam = w[:, None]
    mu = w[None, :]
    diff = lam - mu
    close = np.abs(diff) < 1e-8 * np.maximum(lam, mu)
    safe = np.where(close, 1.0, diff)
    k = np.where(close, 1.0 / np.sqrt(lam * mu), (np.log(lam) - np.log(mu)) / safe)
    if not inverse:
        k = 1.0 / k
    return u @ (k * ft) @ u.conj().T


def log_mean_apply(rho: DensityMatrix, f: np.ndarray) -> np.ndarray:
    """Multiply by the logarithmic-mean kernel (lam-mu)/(ln lam - ln mu);
    equal-eigenvalue limit lam."""
    return _kernel_apply(rho, f, inverse=False)


def log_mean_inverse_apply(rho: DensityMatrix, f: np.ndarray) -> np.ndarray:
    """Multiply by (ln lam - ln mu)/(lam-mu); equal-eigenvalue limit 1/lam.
    Equals the derivative of ln at rho applied to f."""
    return _kernel_apply(rho, f, inverse=True)


def weighted_norm_sq(sigma: DensityMatrix, f: np.ndarray) -> float:
    """||f||² weighted by the inverse logarithmic mean of sigma.

    <f, log_mean_inverse_apply(sigma, f)>; real and nonnegative because
    the kernel is positive.
    """
    val = complex(np.vdot(f, log_mean_inverse_apply(sigma, f)))
    return max(float(val.real), 0.0)


def fisher_information(gen: IrrepGenerators, rho: DensityMatrix, n: int = 1) -> float:
    """Entropy production I(rho) = -tr(L(rho) ln rho), >= 0.

    Requires a strictly positive state; the divided-difference route
    Σ_j <d_j rho, log_mean_inverse(d_j rho)> agrees within rtol 1e-6 and
    is exercised by the test suite as a cross-check.
    """
    w, u = _strict_spectrum(rho)
    log_rho = (u * np.log(w)) @ u.conj().T
    lr = apply_generator(gen, rho.matrix, n)
    val = -float(np.vdot(lr, log_rho).real)
    return val


def fisher_information_chain_rule(gen: IrrepGenerators, rho: DensityMatrix,
                                  n: int = 1) -> float:
    """Fisher via the chain-rule form Σ_j <d_j rho, M^{-1} d_j rho>."""
    total = 0.0
    for d in gradient(gen, rho.matrix, n):
        total += float(np.vdot(d, log_mean_inverse_apply(rho, d)).real)
    return total


def weighted_laplacian_apply(gen: IrrepGenerators, rho: DensityMatrix,
                             f: np.ndarray, n: int = 1) -> np.ndarray:
    """K_rho(f) = -Σ_j [a_j, log_mean_apply(rho, [a_j, f])].

    Positive semidefinite as a quadratic form; K_rho(ln rho) = -L(rho).
    """
    _strict_spectrum(rho)
    f = np.asarray(f, dtype=complex)
    out = np.zeros_like(f)
    for a in amplified_directions(gen, n):
        out -= commutator(a, log_mean_apply(rho, commutator(a, f)))
    return out


def weighted_laplacian_form(gen: IrrepGenerators, rho: DensityMatrix,
                            f: np.ndarray, n: int = 1) -> float:
    """<f, K_rho f> = Σ_j <[a_j,f], log_mean_apply(rho, [a_j,f])> >= 0."""
    total = 0.0
    for a in amplified_directions(gen, n):
        d = commutator(a, np.asarray(f, dtype=complex))
        total += float(np.vdot(d, log_mean_apply(rho, d)).real)
    return total


def operator_inequality_check(gen: IrrepGenerators, rho: DensityMatrix,
                              P: Superoperator, C: float, samples: int,
                              n: int = 1, seed: int = 0) -> dict:
    """Diagnostic for the quadratic-form inequality
    <Pf, K_rho Pf> <= C·<f, K_{P rho} f> over random Hermitian f.

    Returns the worst absolute and relative margins (negative = violation)
    plus the scale used.  P should be a symmetric Markov map commuting
    with the generator (use the semigroup at some t).
    """
    d = gen.m * n
    if P.dim != d or rho.dim != d:
        raise InvalidInput("dimension mismatch between gen/n, rho and P")
    p_rho = DensityMatrix(hermitian_part(P.apply(rho.matrix)), psd_tol=1e-9)
    rng = np.random.default_rng(seed)
    worst = math.inf
    worst_rel = math.inf
    scale = 0.0
    for _ in range(samples):
        f = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        f = hermitian_part(f)
        f /= np.linalg.norm(f)
        lhs = weighted_laplacian_form(gen, rho, P.apply(f), n)
        rhs = C * weighted_laplacian_form(gen, p_rho, f, n)
        margin = rhs - lhs
        s = max(abs(lhs), abs(rhs), 1e-300)
        worst = min(worst, margin)
        worst_rel = min(worst_rel, margin / s)
        scale = max(scale, s)
    return {"max_violation": worst, "max_relative_violation": worst_rel,
            "scale": scale, "samples": samples}
