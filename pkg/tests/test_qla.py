import math

import numpy as np
import pytest

from dqc1.qla import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Z,
    as_density_matrix,
    as_unitary,
    fidelity,
    hermitian_eig,
    hermitian_eigvals,
    is_density_matrix,
    is_unitary,
    kron,
    partial_trace,
    partial_transpose,
    pauli,
    psd_sqrt,
    purity,
    trace_norm,
)
from dqc1.sampling import RngStream, haar_unitary, hs_mixed_state

KET_0 = np.diag([1.0, 0.0]).astype(np.complex128)
KET_1 = np.diag([0.0, 1.0]).astype(np.complex128)
PLUS = np.full((2, 2), 0.5, dtype=np.complex128)


def bell_state():
    ket = np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2.0)
    return np.outer(ket, ket.conj())


def test_pauli_indices():
    assert np.array_equal(pauli(0), IDENTITY_2)
    assert np.array_equal(pauli(3), SIGMA_Z)
    with pytest.raises(ValueError):
        pauli(4)


def test_kron_examples():
    anti = kron(SIGMA_X, SIGMA_X)
    assert np.array_equal(anti, np.fliplr(np.eye(4)))
    assert np.array_equal(kron(IDENTITY_2, IDENTITY_2), np.eye(4))
    assert np.array_equal(kron(KET_0, SIGMA_Z), np.diag([1, -1, 0, 0]))


def test_kron_rejects_overflow():
    with pytest.raises(ValueError):
        kron(np.eye(4), IDENTITY_2)


def test_as_matrix_rejects_bad_shapes_and_nan():
    with pytest.raises(ValueError):
        as_density_matrix(np.eye(5) / 5)
    with pytest.raises(ValueError):
        as_density_matrix(np.array([[np.nan, 0], [0, 1]]))


def test_density_matrix_invariants():
    assert is_density_matrix(IDENTITY_2 / 2)
    assert not is_density_matrix(np.diag([0.6, 0.6]))
    assert not is_density_matrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    assert not is_density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError, match="negative eigenvalue"):
        as_density_matrix(np.diag([1.5, -0.5]))


def test_unitary_check():
    assert is_unitary(SIGMA_X)
    assert not is_unitary(2 * SIGMA_X)
    with pytest.raises(ValueError, match="not unitary"):
        as_unitary(np.ones((2, 2)))


def test_eig_diagonal():
    values, _ = hermitian_eig(SIGMA_Z)
    assert np.allclose(values, [1.0, -1.0])


def test_eig_sigma_x_vectors():
    values, vectors = hermitian_eig(SIGMA_X)
    assert np.allclose(values, [1.0, -1.0])
    plus = np.array([1, 1]) / math.sqrt(2.0)
    minus = np.array([1, -1]) / math.sqrt(2.0)
    assert abs(np.vdot(plus, vectors[:, 0])) == pytest.approx(1.0, abs=1e-12)
    assert abs(np.vdot(minus, vectors[:, 1])) == pytest.approx(1.0, abs=1e-12)


def test_eig_bell_partial_transpose():
    values, _ = hermitian_eig(partial_transpose(bell_state(), "control"))
    assert np.allclose(values, [0.5, 0.5, 0.5, -0.5], atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("index", range(20))
def test_eig_reconstructs_random_states(index):
    rho = hs_mixed_state(4, RngStream(11, index))
    values, vectors = hermitian_eig(rho)
    assert np.all(np.diff(values) <= 1e-15)
    assert np.allclose(vectors @ np.diag(values) @ vectors.conj().T, rho, atol=1e-12)
    assert np.allclose(vectors.conj().T @ vectors, np.eye(4), atol=1e-12)
    assert np.allclose(values, np.linalg.eigvalsh(rho)[::-1], atol=1e-12)


def test_eig_three_dimensional():
    m = np.array([[2, 1j, 0], [-1j, 2, 0], [0, 0, 5]], dtype=np.complex128)
    values, _ = hermitian_eig(m)
    assert np.allclose(values, [5.0, 3.0, 1.0], atol=1e-12)


def test_trace_norm():
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)
    assert trace_norm(np.zeros((2, 2))) == 0.0
    assert trace_norm(partial_transpose(bell_state(), "control")) == pytest.approx(2.0, abs=1e-12)


def test_partial_trace_product_state():
    rho_a = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    rho_b = np.diag([0.25, 0.75]).astype(np.complex128)
    product = kron(rho_a, rho_b)
    assert np.allclose(partial_trace(product, keep="control"), rho_a)
    assert np.allclose(partial_trace(product, keep="auxiliary"), rho_b)


def test_partial_trace_examples():
    assert np.allclose(partial_trace(bell_state(), keep="auxiliary"), IDENTITY_2 / 2)
    mixture = np.diag([0.5, 0, 0, 0.5]).astype(np.complex128)
    assert np.allclose(partial_trace(mixture, keep="control"), np.diag([0.5, 0.5]))
    with pytest.raises(ValueError):
        partial_trace(bell_state(), keep="environment")


def test_partial_transpose_examples():
    rho_a = np.array([[0.6, 0.3j], [-0.3j, 0.4]])
    rho_b = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=np.complex128)
    transposed = partial_transpose(kron(rho_a, rho_b), "control")
    assert np.allclose(transposed, kron(rho_a.T, rho_b))
    diagonal = np.diag([0.1, 0.2, 0.3, 0.4]).astype(np.complex128)
    assert np.array_equal(partial_transpose(diagonal, "auxiliary"), diagonal)
    values, _ = hermitian_eig(partial_transpose(bell_state(), "auxiliary"))
    assert values[-1] == pytest.approx(-0.5, abs=1e-12)


def test_psd_sqrt_examples():
    assert np.allclose(psd_sqrt(np.eye(4)), np.eye(4))
    assert np.allclose(psd_sqrt(np.diag([4.0, 1.0, 0.0, 0.0])), np.diag([2.0, 1.0, 0.0, 0.0]))
    assert np.allclose(psd_sqrt(PLUS), PLUS, atol=1e-12)
    with pytest.raises(ValueError, match="negative eigenvalue"):
        psd_sqrt(np.diag([1.0, -1e-6]))


def test_psd_sqrt_squares_back():
    rho = hs_mixed_state(4, RngStream(3, 0))
    root = psd_sqrt(rho)
    assert np.allclose(root @ root, rho, atol=1e-12)


def test_purity_examples():
    assert purity(IDENTITY_2 / 2) == pytest.approx(0.5)
    assert purity(PLUS) == pytest.approx(1.0)
    assert purity(bell_state()) == pytest.approx(1.0)


def test_fidelity_examples():
    rho = hs_mixed_state(4, RngStream(5, 1))
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)
    assert fidelity(KET_0, KET_1) == pytest.approx(0.0, abs=1e-12)
    assert fidelity(KET_0, IDENTITY_2 / 2) == pytest.approx(0.5)
    with pytest.raises(ValueError, match="dimension mismatch"):
        fidelity(KET_0, np.eye(4) / 4)


def test_fidelity_symmetry_and_unitary_invariance():
    gen = RngStream(7, 0).generator()
    first, second = hs_mixed_state(4, gen), hs_mixed_state(4, gen)
    v = haar_unitary(4, gen)
    value = fidelity(first, second)
    assert 0.0 <= value <= 1.0
    assert fidelity(second, first) == pytest.approx(value, abs=1e-9)
    rotated = fidelity(v @ first @ v.conj().T, v @ second @ v.conj().T)
    assert rotated == pytest.approx(value, abs=1e-9)


def test_eigvals_of_a_stack_match_single_matrices():
    gen = RngStream(15, 0).generator()
    stack = np.array([hs_mixed_state(4, gen) for _ in range(5)] + [np.eye(4) / 4, np.diag([0.7, 0.2, 0.1, 0.0])])
    values = hermitian_eigvals(stack)
    assert values.shape == (7, 4)
    for row, matrix in zip(values, stack):
        single, _ = hermitian_eig(matrix)
        assert np.allclose(row, single, atol=1e-12)
    assert np.allclose(values[-1], [0.7, 0.2, 0.1, 0.0], atol=1e-15)


def test_eigvals_stack_edge_cases():
    assert hermitian_eigvals(np.zeros((0, 4, 4))).shape == (0, 4)
    with pytest.raises(ValueError):
        hermitian_eigvals(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        hermitian_eigvals(np.array([[[0, 1, 0], [0, 0, 0], [0, 0, 0]]]))
    with pytest.raises(ValueError):
        hermitian_eigvals(np.full((1, 3, 3), np.nan))
