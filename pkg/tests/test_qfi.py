import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from cvqnet import qfi
from cvqnet.errors import NonUnitaryError
from cvqnet.random_unitary import RngStream, hs_distance, sample_haar_unitary

from conftest import dft_matrix, haar_nets

# frozen from direct evaluation of x + sqrt(x^2 + x) at x = 1.2
F_PLUS_1_2 = 2.824807680927192


def test_f_values():
    assert qfi.f_plus(0) == 0 and qfi.f_minus(0) == 0
    assert qfi.f_plus(3) == pytest.approx(3 + np.sqrt(12), rel=1e-15)
    assert qfi.f_plus(3) == pytest.approx(6.46410, abs=1e-5)
    assert qfi.f_plus(1.2) == pytest.approx(F_PLUS_1_2, rel=1e-15)
    with pytest.raises(ValueError):
        qfi.f_plus(-0.1)
    with pytest.raises(ValueError):
        qfi.f_minus(-1)


@pytest.mark.parametrize("x", [0.5, 3.0, 12.0])
def test_f_product_identity(x):
    assert qfi.f_plus(x) * qfi.f_minus(x) == pytest.approx(-x, abs=1e-12)
    assert qfi.f_minus(x) == pytest.approx(x - np.sqrt(x * x + x), rel=1e-10)


def test_f_arrays():
    x = np.array([0.0, 1.0, 4.0])
    np.testing.assert_allclose(qfi.f_plus(x) * qfi.f_minus(x), -x, atol=1e-12)


def test_f_plus_concave_increasing():
    x = np.geomspace(0.01, 100, 400)
    h = 1e-3 * x
    second = (qfi.f_plus(x + h) - 2 * qfi.f_plus(x) + qfi.f_plus(x - h)) / h ** 2
    assert np.all(second <= 1e-6)
    assert np.all(np.diff(qfi.f_plus(x)) > 0)


def test_optimal_phases_aligned_and_rotated():
    Q, _ = np.linalg.qr(np.column_stack([np.full(4, 0.5), np.eye(4)[:, 1:]]))
    Q = Q * np.sign(Q[0, 0])
    np.testing.assert_array_equal(qfi.optimal_phases(Q), np.zeros(4))
    theta = np.array([0.3, -1.2, 2.5, np.pi])
    V = np.diag(np.exp(1j * theta)) @ dft_matrix(4)
    np.testing.assert_allclose(qfi.optimal_phases(V), qfi.canonical_phase(-theta), atol=1e-12)


def test_optimal_phases_range_and_zero_amplitude():
    U = np.array([[0, 1], [-1, 0]], dtype=complex)
    phi = qfi.optimal_phases(U)
    assert phi[0] == 0.0 and phi[1] == pytest.approx(np.pi)
    for V in haar_nets(6, 20):
        phi = qfi.optimal_phases(V)
        assert np.all(phi > -np.pi) and np.all(phi <= np.pi)


def test_qfi_phase_optimum():
    gen = np.random.default_rng(0)
    for U in haar_nets(5, 100, seed=8):
        best = qfi.h_lo(U, 0.3)
        assert qfi.qfi_phase(U, qfi.optimal_phases(U), 0.3) == pytest.approx(best, rel=1e-10)
        for _ in range(3):
            assert qfi.qfi_phase(U, gen.uniform(-np.pi, np.pi, 5), 0.3) <= best * (1 + 1e-12)


def test_qfi_phase_special_cases():
    M = 4
    assert qfi.qfi_phase(np.eye(M), np.zeros(M), 0.3) == pytest.approx(2 * M + 4 * F_PLUS_1_2)
    U = haar_nets(M, 1)[0]
    assert qfi.qfi_phase(U, np.ones(M), 0.0) == pytest.approx(2 * M)


def test_h_lo_values():
    assert qfi.h_lo(np.eye(4), 0.3) == pytest.approx(8 + 4 * F_PLUS_1_2)
    assert qfi.h_lo(np.eye(4), 0.3) == pytest.approx(19.2993, abs=1e-4)
    assert qfi.h_lo(dft_matrix(4), 0.3) == pytest.approx(53.1970, abs=1e-4)
    assert qfi.h_lo(dft_matrix(4), 0.3) == pytest.approx(qfi.h_max(4, 0.3), rel=1e-12)
    P = np.eye(4)[[2, 0, 3, 1]]
    assert qfi.h_lo(P, 0.3) == pytest.approx(qfi.h_lo(np.eye(4), 0.3))


def test_h_lo_rejects_non_unitary():
    with pytest.raises(NonUnitaryError):
        qfi.h_lo(np.ones((2, 2)), 0.3)


def test_h_max_values():
    assert qfi.h_max(1, 0.7) == pytest.approx(2 + 4 * qfi.f_plus(0.7))
    assert qfi.h_max(4, 0.3) == pytest.approx(8 + 16 * F_PLUS_1_2)
    assert qfi.h_max(200, 0.3) / 200 ** 2 == pytest.approx(8 * 0.3, rel=0.01)


def test_h_mo_and_h_mlo():
    M = 5
    expected = 2 * M + 4 * qfi.f_plus(0.3 * M)
    assert qfi.h_mo(np.eye(M), 0.3) == pytest.approx(expected)
    assert qfi.h_mlo(np.eye(M), 0.3) == pytest.approx(expected)
    F = dft_matrix(M)  # first column all 1/sqrt(M), positive
    assert qfi.h_mo(F, 0.3) == pytest.approx(qfi.h_max(M, 0.3), rel=1e-12)
    for U in haar_nets(8, 1000, seed=9):
        assert qfi.h_mo(U, 0.3) <= qfi.h_mlo(U, 0.3) * (1 + 1e-12)


def test_h_mlo_block_decoupled():
    W = haar_nets(3, 1)[0]
    U = np.eye(4, dtype=complex)
    U[1:, 1:] = W
    assert qfi.h_lo(U, 0.3) == pytest.approx(8 + 4 * F_PLUS_1_2)
    assert qfi.h_mlo(U, 0.3) >= qfi.h_lo(U, 0.3)


def test_tie_break_smallest_index():
    assert qfi.best_input_mode(np.array([1.0, 3.0, 3.0])) == 1


def test_h_mo_matches_rotated_input_covariance_path():
    from cvqnet.gaussian import apply_bsn, apply_phase_shifts, make_input_state, qfi_displacement

    M, nbar = 5, 0.4
    for U in haar_nets(M, 10, seed=10):
        sums = np.sum(U, axis=0)
        b = int(np.argmax(np.abs(sums)))
        rot = np.zeros(M)
        rot[b] = -np.angle(sums[b])
        state = apply_bsn(apply_phase_shifts(make_input_state(M, nbar * M, b), rot), U)
        assert qfi_displacement(state) == pytest.approx(qfi.h_mo(U, nbar), rel=1e-9)


def test_h_lossy_limits_and_cross_path():
    from cvqnet.ensemble import covariance_path_qfi

    for U in haar_nets(6, 10, seed=11):
        assert qfi.h_lossy(U, 0.3, 1.0) == qfi.h_lo(U, 0.3)
        assert qfi.h_lossy(U, 0.3, 0.0) == pytest.approx(12.0)
        for eta in (0.2, 0.7):
            assert qfi.h_lossy(U, 0.3, eta) == pytest.approx(covariance_path_qfi(U, 0.3, eta), rel=1e-8)
    with pytest.raises(ValueError):
        qfi.h_lossy(np.eye(2), 0.3, 1.2)


def test_loss_threshold_beta():
    assert qfi.loss_threshold_beta(0.5, 0.3, 10) == pytest.approx(0.5 / (1 + 2 * (3 + np.sqrt(12))), rel=1e-14)
    assert qfi.loss_threshold_beta(0.5, 0.3, 10) == pytest.approx(0.0358984, abs=1e-7)
    assert qfi.loss_threshold_beta(1 - 1e-12, 0.3, 10) < 1e-12
    for a in (0.0, 1.0):
        with pytest.raises(ValueError):
            qfi.loss_threshold_beta(a, 0.3, 10)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.9])
def test_loss_threshold_guarantee(alpha):
    M, nbar = 8, 0.3
    eta = 1 - qfi.loss_threshold_beta(alpha, nbar, M)
    for U in haar_nets(M, 100, seed=12):
        s = np.sum(np.abs(U[:, 0]))
        assert qfi.h_lossy(U, nbar, eta) >= 2 * M + 4 * alpha * s ** 2 * qfi.f_plus(nbar * M)


def test_g_i():
    M, nbar = 6, 0.3
    for i in range(M):
        assert qfi.g_i(np.eye(M), i, nbar) == pytest.approx(4 * M + 8 * nbar * M)
    with pytest.raises(IndexError):
        qfi.g_i(np.eye(M), M, nbar)
    for U in haar_nets(M, 1000, seed=13):
        assert qfi.h_mo(U, nbar) <= max(qfi.g_i(U, i, nbar) for i in range(M)) * (1 + 1e-12)


def test_proper_squeezed_and_global_bound():
    gen = np.random.default_rng(3)
    M, N = 5, 2.0
    for U in haar_nets(M, 50, seed=14):
        phi = gen.uniform(-np.pi, np.pi, M)
        alloc = gen.dirichlet(np.ones(M)) * N
        assert qfi.h_proper_squeezed(U, phi, alloc) <= qfi.h_global_bound(U, phi, N) * (1 + 1e-12)
        assert qfi.h_global_bound(U, phi, N) <= qfi.h_max(M, N / M) * (1 + 1e-12)
        assert qfi.h_global_bound(U, phi, N) < qfi.h_max(M, N / M)
        assert qfi.h_proper_squeezed(U, phi, np.zeros(M)) == pytest.approx(2 * M)
        assert qfi.h_global_bound(U, phi, 0.0) == pytest.approx(2 * M)
        # all photons in mode 0 with optimal phases: single column, |sum|^2 = (sum |U_a0|)^2
        single = np.zeros(M)
        single[0] = N
        opt = qfi.optimal_phases(U)
        assert qfi.h_proper_squeezed(U, opt, single) == pytest.approx(qfi.h_lo(U, N / M), rel=1e-12)


def test_global_bound_balanced_is_tight():
    F = dft_matrix(6)
    assert qfi.h_global_bound(F, np.zeros(6), 1.8) == pytest.approx(qfi.h_max(6, 0.3), rel=1e-12)


def test_lipschitz_bound_values():
    assert qfi.lipschitz_bound(1, 0.0) == 0
    assert qfi.lipschitz_bound(10, 0.3) == pytest.approx(80 * (3 + np.sqrt(12)))
    assert qfi.lipschitz_bound(10, 0.3) == pytest.approx(517.128, abs=1e-3)


def test_lipschitz_bound_holds_on_nearby_pairs():
    gen = np.random.default_rng(5)
    M, nbar = 6, 0.3
    L = qfi.lipschitz_bound(M, nbar)
    for U in haar_nets(M, 1000, seed=15):
        A = gen.normal(size=(M, M)) + 1j * gen.normal(size=(M, M))
        X = (A + A.conj().T) / 2
        V = expm(-1j * 1e-3 * X) @ U
        assert abs(qfi.h_lo(V, nbar) - qfi.h_lo(U, nbar)) <= L * hs_distance(V, U)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.floats(0, 2), st.integers(0, 10**6))
def test_ordering_chain(M, nbar, seed):
    U = sample_haar_unitary(M, RngStream(seed))
    b = qfi.qfi_breakdown(U, nbar)
    tol = 1e-12 * b.h_max
    assert 2 * M - tol <= b.h_lo <= b.h_mlo + tol
    assert b.h_mlo <= b.h_max + tol
    assert b.h_mo <= b.h_mlo + tol
    assert b.h_max == 2 * M + 4 * M * qfi.f_plus(nbar * M)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10**6))
def test_h_lo_invariances(M, seed):
    gen = RngStream(seed, 1).generator()
    U = sample_haar_unitary(M, RngStream(seed))
    ref = qfi.h_lo(U, 0.3)
    D = np.diag(np.exp(1j * gen.uniform(-np.pi, np.pi, M)))
    P = np.eye(M)[gen.permutation(M)]
    W = np.eye(M, dtype=complex)
    W[1:, 1:] = sample_haar_unitary(M - 1, RngStream(seed, 2))
    for V in (D @ U, P @ U, U @ W):
        assert qfi.h_lo(V, 0.3) == pytest.approx(ref, rel=1e-12)


def test_breakdown_dict():
    U = dft_matrix(3)
    d = qfi.qfi_breakdown(U, 0.3).to_dict()
    assert set(d) >= {"h_lo", "h_mo", "h_mlo", "h_max", "optimal_phases", "column_abs_sums", "column_sums_abs2"}
    assert all(isinstance(v, float) for v in d["optimal_phases"])
