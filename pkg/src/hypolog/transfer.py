"""The coherent embedding intertwining the group and quantum pictures.

A state rho of the m-dimensional quantum system embeds into matrix-valued
functions on the group as

    alpha(rho)(g) = pi_m(g) · rho · pi_m(g)†,

an algebra homomorphism into band-(2m-1) functions.  Under it the
horizontal heat flow restricts to the quantum semigroup: the first-order
left-invariant derivatives of alpha(rho) are alpha([X, rho]),
alpha([Y, rho]) and the horizontal second-order action is
alpha(L(rho)).  The checks here verify that diagram two ways per point:

* exact route: project alpha(rho) onto its band, differentiate in
  coefficient space, compare (residuals at numerical precision);
* finite differences along g·exp(tV) (residuals at the step's accuracy).

Together with agreement at t = 0 and uniqueness of solutions of the
coefficient ODE, the derivative-level check certifies the semigroup-level
diagram without constructing the heat kernel on the embedded band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entfun import fisher_information, log_mean_inverse_apply, relative_entropy
from .errors import InvalidInput
from .numkit import hermitian_part
from .pwfun import (BandLimitedFunction, BandProjector, RepTable,
                    SampledField, band_dimension, evaluate, vector_field)
from .qms import (DensityMatrix, Superoperator, apply_generator, commutator,
                  evolve)
from .su2repr import (GroupElement, IrrepGenerators, group_exp_step,
                      haar_sample, represent)


@dataclass(frozen=True)
class CoherentEmbedding:
    """g -> pi(g) rho pi(g)†, evaluated lazily."""

    gen: IrrepGenerators
    rho: np.ndarray

    def __call__(self, g: GroupElement) -> np.ndarray:
        u = represent(self.gen, g)
        return u @ self.rho @ u.conj().T


def embed(gen: IrrepGenerators, rho: DensityMatrix) -> CoherentEmbedding:
    """Coherent embedding of a state; unitarily covariant, PSD and
    trace-preserving at every point."""
    if rho.dim != gen.m:
        raise InvalidInput(f"state dim {rho.dim} != representation dim {gen.m}")
    return CoherentEmbedding(gen=gen, rho=np.array(rho.matrix))


def embedding_coefficients(gen: IrrepGenerators, rho: np.ndarray,
                           seed: int = 0) -> tuple[BandLimitedFunction, float]:
    """Band-(2m-1) coefficients of g -> pi(g) rho pi(g)† by least squares.

    The embedded field is exactly band-limited there, so the returned
    residual is a pure numerical-rank diagnostic.
    """
    m = gen.m
    band = 2 * m - 1
    pts = haar_sample((seed, 30), 4 * band_dimension(band, m))
    vals = np.stack([represent(gen, g) @ rho @ represent(gen, g).conj().T
                     for g in pts])
    field = SampledField(points=tuple(pts), values=vals)
    projector = BandProjector(pts, band, ridge=0.0)
    return projector.project(field)


def _second_derivative(emb: CoherentEmbedding, g: GroupElement,
                       direction: str, step: float) -> np.ndarray:
    up = emb(group_exp_step(g, direction, step))
    mid = emb(g)
    dn = emb(group_exp_step(g, direction, -step))
    return (up - 2.0 * mid + dn) / (step * step)


def generator_transference_check(gen: IrrepGenerators, rho: np.ndarray,
                                 points: int, seed: int = 0) -> dict:
    """Residuals of the infinitesimal transference diagram.

    Exact route: coefficient-space derivatives of the embedded field vs
    pi(g)[V, rho]pi(g)† (first order) and alpha(L rho) (second order).
    Finite-difference route: central differences along g·exp(tV), step
    1e-5 first order / 1e-4 second order.  Residuals are reported relative
    to the spectral norm of rho.
    """
    rho = hermitian_part(rho)
    scale = max(float(np.linalg.norm(rho, 2)), 1e-300)
    emb = CoherentEmbedding(gen=gen, rho=rho)
    coeffs, proj_residual = embedding_coefficients(gen, rho, seed)
    first = {v: vector_field(coeffs, v) for v in ("X", "Y")}
    second = sum((vector_field(first[v], v) for v in ("X", "Y")),
                 start=BandLimitedFunction.zero(coeffs.m_max, gen.m))
    l_rho = apply_generator(gen, rho, 1)

    check_points = haar_sample((seed, 31), points)
    exact = 0.0
    fd = 0.0
    for g in check_points:
        u = represent(gen, g)
        for v in ("X", "Y"):
            target = u @ commutator(getattr(gen, v), rho) @ u.conj().T
            exact = max(exact, float(np.abs(evaluate(first[v], g) - target).max()))
            h = 1e-5
            diff = (emb(group_exp_step(g, v, h)) - emb(group_exp_step(g, v, -h))) / (2 * h)
            fd = max(fd, float(np.abs(diff - target).max()))
        target2 = u @ l_rho @ u.conj().T
        exact = max(exact, float(np.abs(evaluate(second, g) - target2).max()))
        fd2 = sum(_second_derivative(emb, g, v, 1e-4) for v in ("X", "Y"))
        fd = max(fd, float(np.abs(fd2 - target2).max()))
    return {"max_residual_exact": exact / scale,
            "max_residual_fd": fd / scale,
            "projection_residual": proj_residual,
            "points": points, "scale": scale}


def semigroup_transference_check(gen: IrrepGenerators, rho: DensityMatrix,
                                 L: Superoperator, t_grid, points: int,
                                 seed: int = 0) -> dict:
    """Derivative-matching residuals of the diagram along the trajectory.

    At each t the generator-level check runs at S_t rho, and the time
    derivative of t -> alpha(S_t rho)(g) is compared against
    alpha(L S_t rho)(g) by central differences.  Equality at t = 0 plus
    these derivative matches certify the diagram by uniqueness of the
    coefficient ODE's solutions.
    """
    if rho.dim != L.dim or rho.dim != gen.m:
        raise InvalidInput("semigroup check needs the bare (n=1) dimensions")
    check_points = haar_sample((seed, 32), points)
    per_t = {}
    for t in t_grid:
        t = float(t)
        rt = evolve(L, rho, t)
        gen_check = generator_transference_check(gen, rt.matrix, points, seed)
        h = 1e-5 if t >= 1e-5 else t / 2 + 1e-6
        up = evolve(L, rho, t + h).matrix
        dn = evolve(L, rho, max(t - h, 0.0)).matrix
        ddt = (up - dn) / (h + min(h, t))
        target = apply_generator(gen, rt.matrix, 1)
        time_res = 0.0
        for g in check_points[:10]:
            u = represent(gen, g)
            lhs = u @ ddt @ u.conj().T
            rhs = u @ target @ u.conj().T
            time_res = max(time_res, float(np.abs(lhs - rhs).max()))
        per_t[t] = {"generator_residual_exact": gen_check["max_residual_exact"],
                    "generator_residual_fd": gen_check["max_residual_fd"],
                    "time_derivative_residual": time_res / gen_check["scale"]}
    worst = max(v["generator_residual_exact"] for v in per_t.values())
    return {"per_t": per_t, "max_residual": worst, "points": points}


def entropy_transference_check(gen: IrrepGenerators, rho: DensityMatrix,
                               L: Superoperator, t_grid, points: int,
                               seed: int = 0) -> dict:
    """Unitary-invariance identity D(alpha(S_t rho)(g) || I/m) =
    D(S_t rho || I/m) at every sampled g; reports the worst deviation."""
    check_points = haar_sample((seed, 33), points)
    mix = DensityMatrix.maximally_mixed(gen.m)
    worst = 0.0
    for t in t_grid:
        rt = evolve(L, rho, float(t))
        emb = CoherentEmbedding(gen=gen, rho=np.array(rt.matrix))
        d_q = relative_entropy(rt, mix)
        for g in check_points:
            d_c = relative_entropy(
                DensityMatrix(hermitian_part(emb(g)), psd_tol=1e-9), mix)
            worst = max(worst, abs(d_c - d_q))
    return {"max_deviation": worst, "points": points}


def fisher_transference_check(gen: IrrepGenerators, rho: DensityMatrix,
                              points: int, seed: int = 0) -> dict:
    """Quantum Fisher vs the Haar average of the classical horizontal
    Fisher integrand of the embedded field.

    The integrand Σ_V tr([V,rho_g]† d ln(rho_g)[[V,rho_g]]) at
    rho_g = alpha(rho)(g) is constant in g by unitary covariance, so the
    Monte-Carlo mean must match I(rho) within statistical error and the
    pointwise deviation must vanish.
    """
    i_q = fisher_information(gen, rho, 1)
    emb = CoherentEmbedding(gen=gen, rho=np.array(rho.matrix))
    pts = haar_sample((seed, 34), points)
    vals = []
    for g in pts:
        u = represent(gen, g)
        rho_g = DensityMatrix(hermitian_part(emb(g)), psd_tol=1e-9)
        total = 0.0
        for v in ("X", "Y"):
            # left-invariant derivative of the embedded field at g
            d = u @ commutator(getattr(gen, v), rho.matrix) @ u.conj().T
            total += float(np.vdot(d, log_mean_inverse_apply(rho_g, d)).real)
        vals.append(total)
    arr = np.array(vals)
    stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
    return {"quantum_fisher": i_q, "mc_mean": float(arr.mean()),
            "mc_stderr": stderr,
            "max_pointwise_deviation": float(np.abs(arr - i_q).max()),
            "points": points}
