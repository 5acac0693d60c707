import numpy as np
import pytest

from hypolog import qms
from hypolog.errors import DegenerateGenerator, InvalidInput
from hypolog.numkit import hermitian_part
from hypolog.su2repr import build_generators

GEN2 = build_generators(2)
L2 = qms.lindblad_generator(GEN2)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return hermitian_part(a)


def test_pauli_basis_action():
    # Pauli-basis double-commutator arithmetic oracle
    assert np.abs(L2.apply(SX) + 4 * SX).max() < 1e-12
    assert np.abs(L2.apply(SY) + 4 * SY).max() < 1e-12
    assert np.abs(L2.apply(SZ) + 8 * SZ).max() < 1e-12
    assert np.abs(L2.apply(np.eye(2))).max() < 1e-12


def test_l2_spectrum():
    w = np.linalg.eigvalsh(L2.matrix)
    assert np.allclose(sorted(w), [-8, -4, -4, 0], atol=1e-10)


def test_l2_on_pure_diagonal():
    rho = np.diag([1.0, 0.0]).astype(complex)
    assert np.abs(L2.apply(rho) - np.diag([-4.0, 4.0])).max() < 1e-12


def test_m1_zero_superoperator():
    L1 = qms.lindblad_generator(build_generators(1))
    assert np.abs(L1.matrix).max() == 0.0


def test_generator_matches_direct_commutators():
    for m, n in [(2, 1), (3, 1), (2, 2)]:
        gen = build_generators(m)
        L = qms.lindblad_generator(gen, n)
        a = random_hermitian(m * n, m + 10 * n)
        assert np.abs(L.apply(a) - qms.apply_generator(gen, a, n)).max() < 1e-10


@pytest.mark.parametrize("m,n", [(2, 1), (3, 1), (4, 1), (2, 2), (3, 2), (4, 2)])
def test_generator_symmetry_and_negativity(m, n):
    gen = build_generators(m)
    L = qms.lindblad_generator(gen, n)
    assert L.is_selfadjoint(atol=1e-10)
    d = m * n
    for seed in range(5):
        a, b = random_hermitian(d, seed), random_hermitian(d, seed + 100)
        lhs = np.vdot(a, L.apply(b))
        rhs = np.vdot(L.apply(a), b)
        assert abs(lhs - rhs) < 1e-9
        assert np.vdot(a, L.apply(a)).real <= 1e-10
        # trace annihilation
        assert abs(np.trace(L.apply(a))) < 1e-10


def test_evolve_t0_and_trace():
    rho = qms.DensityMatrix.random(2, 1)
    out = qms.evolve(L2, rho, 0.0)
    assert np.abs(out.matrix - rho.matrix).max() < 1e-12


def test_evolve_rejects_negative_time():
    rho = qms.DensityMatrix.maximally_mixed(2)
    with pytest.raises(InvalidInput):
        qms.evolve(L2, rho, -0.1)


def test_evolve_long_time_reaches_fixed_point():
    from hypolog.numkit import trace_norm
    for seed in range(3):
        rho = qms.DensityMatrix.random(2, seed)
        out = qms.evolve(L2, rho, 50.0)
        assert trace_norm(out.matrix - np.eye(2) / 2) < 1e-8


def test_evolve_diagonal_mode_closed_form():
    rho = qms.DensityMatrix(np.diag([1.0, 0.0]).astype(complex))
    for t in (0.05, 0.3, 1.7):
        out = qms.evolve(L2, rho, t)
        expected = np.diag([(1 + np.exp(-8 * t)) / 2, (1 - np.exp(-8 * t)) / 2])
        assert np.abs(out.matrix - expected).max() < 1e-10


def test_semigroup_law():
    for m, n in [(2, 1), (3, 2)]:
        gen = build_generators(m)
        L = qms.lindblad_generator(gen, n)
        rho = qms.DensityMatrix.random(m * n, 5)
        a = qms.evolve(L, qms.evolve(L, rho, 0.4), 0.9)
        b = qms.evolve(L, rho, 1.3)
        assert np.abs(a.matrix - b.matrix).max() < 1e-9


def test_semigroup_commutes_with_generator():
    for t in (0.1, 1.0):
        st = qms.semigroup(L2, t)
        comm = st.matrix @ L2.matrix - L2.matrix @ st.matrix
        assert np.abs(comm).max() < 1e-9


def test_fixed_point_projection_bare():
    e = qms.fixed_point_projection(L2)
    rho = np.diag([1.0, 0.0]).astype(complex)
    assert np.abs(e.apply(rho) - np.eye(2) / 2).max() < 1e-10
    # idempotent
    assert np.abs(e.matrix @ e.matrix - e.matrix).max() < 1e-10
    # commutes with L
    assert np.abs(e.matrix @ L2.matrix - L2.matrix @ e.matrix).max() < 1e-9


def test_fixed_point_projection_amplified_product_state():
    gen = build_generators(2)
    L = qms.lindblad_generator(gen, 2)
    rho2 = qms.DensityMatrix.random(2, 3).matrix
    rho = np.kron(np.diag([0.7, 0.3]).astype(complex), rho2)
    e = qms.fixed_point_projection(L)
    expected = np.kron(np.eye(2) / 2, rho2)
    assert np.abs(e.apply(rho) - expected).max() < 1e-9
    # matches the explicit partial-trace formula
    direct = np.kron(np.eye(2) / 2, qms.partial_trace_first(rho, 2, 2))
    assert np.abs(e.apply(rho) - direct).max() < 1e-9


def test_projection_is_semigroup_limit():
    from hypolog.numkit import trace_norm
    e = qms.fixed_point_projection(L2)
    rho = qms.DensityMatrix.random(2, 8)
    far = qms.evolve(L2, rho, 60.0)
    assert trace_norm(far.matrix - e.apply(rho.matrix)) < 1e-9


def test_exponential_convergence_rate():
    gap = qms.spectral_gap(L2)
    e = qms.fixed_point_projection(L2)
    for seed in range(3):
        rho = qms.DensityMatrix.random(2, seed + 40)
        dev0 = np.linalg.norm(rho.matrix - e.apply(rho.matrix))
        for t in (1.0, 2.0, 4.0):
            dev = np.linalg.norm(qms.evolve(L2, rho, t).matrix
                                 - e.apply(rho.matrix))
            assert dev <= np.exp(-gap * t) * dev0 * 1.05


def test_verify_cp():
    rep = qms.verify_cp(L2, 0.1)
    assert rep["choi_min_eig"] >= -1e-9
    assert rep["trace_defect"] < 1e-10
    rep3 = qms.verify_cp(qms.lindblad_generator(build_generators(3)), 1.0)
    assert rep3["trace_defect"] < 1e-10
    assert rep3["choi_min_eig"] >= -1e-9


def test_choi_identity_limit():
    # t -> 0+: Choi approaches the rank-1 Choi of the identity channel
    rep = qms.verify_cp(L2, 1e-9)
    choi_eigs = np.linalg.eigvalsh(_choi(L2, 1e-9))
    assert abs(choi_eigs[-1] - 2.0) < 1e-6
    assert np.abs(choi_eigs[:-1]).max() < 1e-6
    assert rep["choi_min_eig"] >= -1e-9


def _choi(L, t):
    st = qms.semigroup(L, t)
    d = L.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for k in range(d):
            ejk = np.zeros((d, d), dtype=complex)
            ejk[j, k] = 1.0
            out += np.kron(ejk, st.apply(ejk))
    return out


def test_spectral_gap_values():
    assert qms.spectral_gap(L2) == pytest.approx(4.0, abs=1e-10)
    with pytest.raises(DegenerateGenerator):
        qms.spectral_gap(qms.lindblad_generator(build_generators(1)))
    # amplification preserves the gap (tensor spectrum)
    L22 = qms.lindblad_generator(GEN2, 2)
    assert qms.spectral_gap(L22) == pytest.approx(4.0, abs=1e-9)


def test_density_matrix_validation():
    with pytest.raises(InvalidInput):
        qms.DensityMatrix(np.diag([0.7, 0.7]).astype(complex))  # trace 1.4
    with pytest.raises(InvalidInput):
        qms.DensityMatrix(np.diag([1.5, -0.5]).astype(complex))  # not PSD
