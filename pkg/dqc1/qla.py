"""Dense complex linear algebra for 2-, 3- and 4-dimensional matrices.

Every matrix is a ``numpy`` array of ``complex128``. Two-qubit operators use
the basis index ``2 * control_bit + auxiliary_bit`` throughout the package.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

ComplexMatrix = NDArray[np.complex128]
DensityMatrix = NDArray[np.complex128]
UnitaryMatrix = NDArray[np.complex128]
Subsystem = Literal["control", "auxiliary"]

ALLOWED_DIMS = (2, 3, 4)
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGEN_FLOOR = -1e-10
UNITARY_TOL = 1e-12
EIGEN_INPUT_TOL = 1e-10
SQRT_REJECT_FLOOR = -1e-8
JACOBI_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 64

IDENTITY_2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def pauli(index: int) -> ComplexMatrix:
    """Return sigma_0..sigma_3, where sigma_0 is the identity."""
    if index == 0:
        return IDENTITY_2.copy()
    if index not in (1, 2, 3):
        raise ValueError(f"Pauli index must be 0..3, got {index}")
    return PAULIS[index - 1].copy()


def dagger(m: ArrayLike) -> ComplexMatrix:
    return np.asarray(m, dtype=np.complex128).conj().T


def as_matrix(m: ArrayLike) -> ComplexMatrix:
    """Coerce to a finite complex matrix with both axes in {2, 3, 4}."""
    mat = np.asarray(m, dtype=np.complex128)
    if mat.ndim != 2:
        raise ValueError(f"expected a matrix, got an array with {mat.ndim} axes")
    rows, cols = mat.shape
    if rows not in ALLOWED_DIMS or cols not in ALLOWED_DIMS:
        raise ValueError(f"matrix shape {mat.shape} outside dimensions {ALLOWED_DIMS}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix has non-finite entries")
    return mat


def _as_square(m: ArrayLike) -> ComplexMatrix:
    mat = as_matrix(m)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    return mat


def hermitian_residual(m: ArrayLike) -> float:
    mat = np.asarray(m, dtype=np.complex128)
    return float(np.max(np.abs(mat - mat.conj().T)))


def hermitize(m: ArrayLike) -> ComplexMatrix:
    mat = np.asarray(m, dtype=np.complex128)
    return 0.5 * (mat + mat.conj().T)


def unitary_residual(m: ArrayLike) -> float:
    mat = np.asarray(m, dtype=np.complex128)
    return float(np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0]))))


def is_unitary(m: ArrayLike, tol: float = UNITARY_TOL) -> bool:
    try:
        mat = _as_square(m)
    except ValueError:
        return False
    return unitary_residual(mat) <= tol


def as_unitary(m: ArrayLike, tol: float = UNITARY_TOL) -> UnitaryMatrix:
    mat = _as_square(m)
    residual = unitary_residual(mat)
    if residual > tol:
        raise ValueError(f"matrix is not unitary (residual {residual:.3e})")
    return mat


def as_density_matrix(
    m: ArrayLike,
    *,
    check_spectrum: bool = True,
) -> DensityMatrix:
    """Validate the density-matrix invariants and return the matrix.

    ``check_spectrum=False`` skips the eigenvalue test for producers whose
    output is positive by construction (unitary or congruence maps).
    """
    mat = _as_square(m)
    if mat.shape[0] not in (2, 4):
        raise ValueError(f"density matrix must be 2x2 or 4x4, got {mat.shape}")
    residual = hermitian_residual(mat)
    if residual > HERMITIAN_TOL:
        raise ValueError(f"density matrix is not Hermitian (residual {residual:.3e})")
    trace = np.trace(mat)
    if abs(trace - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace {trace.real:.15f} differs from 1")
    if check_spectrum:
        smallest = hermitian_eig(mat)[0][-1]
        if smallest < EIGEN_FLOOR:
            raise ValueError(f"density matrix has negative eigenvalue {smallest:.3e}")
    return mat


def is_density_matrix(m: ArrayLike) -> bool:
    try:
        as_density_matrix(m)
    except ValueError:
        return False
    return True


def normalize_state(m: ArrayLike) -> DensityMatrix:
    """Hermitize and rescale to unit trace; guards round-off after products."""
    mat = hermitize(m)
    return mat / np.trace(mat).real


def kron(a: ArrayLike, b: ArrayLike) -> ComplexMatrix:
    left = as_matrix(a)
    right = as_matrix(b)
    rows = left.shape[0] * right.shape[0]
    cols = left.shape[1] * right.shape[1]
    if rows > 4 or cols > 4:
        raise ValueError(f"Kronecker product shape ({rows}, {cols}) exceeds 4x4")
    return np.kron(left, right)


def _rotation(a_pp: float, a_qq: float, a_pq: complex) -> NDArray[np.complex128] | None:
    # Columns are the eigenvectors of [[a_pp, a_pq], [conj(a_pq), a_qq]],
    # the first one belonging to the larger eigenvalue.
    magnitude = abs(a_pq)
    if magnitude == 0.0:
        return None
    phase = (a_pq / magnitude).conjugate()
    theta = 0.5 * math.atan2(2.0 * magnitude, a_pp - a_qq)
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s * phase, c * phase]], dtype=np.complex128)


def _off_diagonal_mass(a: NDArray[np.complex128]) -> NDArray[np.float64]:
    n = a.shape[-1]
    off = a * (1.0 - np.eye(n))
    return np.sqrt(np.sum(np.abs(off) ** 2, axis=(-2, -1)))


def _jacobi_eigh(stack: NDArray[np.complex128]) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    # Sweeps a whole stack at once; a matrix stops rotating as soon as its own
    # off-diagonal mass is below JACOBI_TOL, so results do not depend on the
    # other members of the stack.
    a = stack.copy()
    count, n = a.shape[0], a.shape[-1]
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy()
    for _ in range(_JACOBI_MAX_SWEEPS):
        active = _off_diagonal_mass(a) >= JACOBI_TOL
        if not active.any():
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                a_pq = a[:, p, q]
                magnitude = np.abs(a_pq)
                rotate = active & (magnitude > 0.0)
                if not rotate.any():
                    continue
                safe = np.where(rotate, magnitude, 1.0)
                phase = np.where(rotate, np.conj(a_pq) / safe, 1.0)
                spread = a[:, p, p].real - a[:, q, q].real
                theta = np.where(rotate, 0.5 * np.arctan2(2.0 * magnitude, spread), 0.0)
                c, s = np.cos(theta), np.sin(theta)
                g = np.empty((count, 2, 2), dtype=np.complex128)
                g[:, 0, 0] = c
                g[:, 0, 1] = -s
                g[:, 1, 0] = s * phase
                g[:, 1, 1] = c * phase
                pair = [p, q]
                a[:, :, pair] = a[:, :, pair] @ g
                a[:, pair, :] = np.conj(np.swapaxes(g, 1, 2)) @ a[:, pair, :]
                v[:, :, pair] = v[:, :, pair] @ g
                a[rotate, p, q] = 0.0
                a[rotate, q, p] = 0.0
    return np.diagonal(a, axis1=1, axis2=2).real.copy(), v


def _descending(
    values: NDArray[np.float64], vectors: NDArray[np.complex128]
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    order = np.argsort(-values, axis=-1, kind="stable")
    values = np.take_along_axis(values, order, axis=-1)
    vectors = np.take_along_axis(vectors, order[..., None, :], axis=-1)
    return values, vectors


def hermitian_eig(m: ArrayLike) -> tuple[NDArray[np.float64], ComplexMatrix]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Two-dimensional input is diagonalized by a single closed-form rotation;
    three- and four-dimensional input by cyclic Jacobi sweeps.
    """
    mat = _as_square(m)
    residual = hermitian_residual(mat)
    if residual > EIGEN_INPUT_TOL:
        raise ValueError(f"matrix is not Hermitian (residual {residual:.3e})")
    mat = hermitize(mat)
    if mat.shape[0] == 2:
        g = _rotation(mat[0, 0].real, mat[1, 1].real, mat[0, 1])
        vectors = np.eye(2, dtype=np.complex128) if g is None else g
        values = np.real(np.einsum("ji,jk,ki->i", vectors.conj(), mat, vectors))
        order = np.argsort(-values, kind="stable")
        return values[order], vectors[:, order]
    values, vectors = _descending(*_jacobi_eigh(mat[None]))
    return values[0], vectors[0]


def hermitian_eigvals(stack: ArrayLike) -> NDArray[np.float64]:
    """Descending eigenvalues of every matrix in a (k, n, n) Hermitian stack, n in {3, 4}.

    Each row equals ``hermitian_eig`` of the corresponding matrix.
    """
    mats = np.asarray(stack, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2] or mats.shape[1] not in (3, 4):
        raise ValueError(f"expected a stack of 3x3 or 4x4 matrices, got shape {mats.shape}")
    if mats.shape[0] == 0:
        return np.zeros((0, mats.shape[1]))
    if not np.all(np.isfinite(mats)):
        raise ValueError("matrix stack has non-finite entries")
    residual = float(np.max(np.abs(mats - np.conj(np.swapaxes(mats, 1, 2)))))
    if residual > EIGEN_INPUT_TOL:
        raise ValueError(f"stack is not Hermitian (residual {residual:.3e})")
    mats = 0.5 * (mats + np.conj(np.swapaxes(mats, 1, 2)))
    values, _ = _descending(*_jacobi_eigh(mats))
    return values


def trace_norm(m: ArrayLike) -> float:
    """Sum of singular values."""
    mat = _as_square(m)
    if hermitian_residual(mat) <= EIGEN_INPUT_TOL:
        values, _ = hermitian_eig(mat)
        return float(np.sum(np.abs(values)))
    gram, _ = hermitian_eig(mat.conj().T @ mat)
    return float(np.sum(np.sqrt(np.clip(gram, 0.0, None))))


def _two_qubit_tensor(rho: ArrayLike) -> NDArray[np.complex128]:
    mat = _as_square(rho)
    if mat.shape != (4, 4):
        raise ValueError(f"expected a two-qubit 4x4 matrix, got {mat.shape}")
    return mat.reshape(2, 2, 2, 2)


def partial_trace(rho: ArrayLike, keep: Subsystem) -> DensityMatrix:
    """Reduced state of ``keep`` from a control-auxiliary state."""
    tensor = _two_qubit_tensor(rho)
    if keep == "control":
        return np.einsum("ijkj->ik", tensor)
    if keep == "auxiliary":
        return np.einsum("ijil->jl", tensor)
    raise ValueError(f"unknown subsystem {keep!r}")


def partial_transpose(rho: ArrayLike, subsystem: Subsystem) -> ComplexMatrix:
    tensor = _two_qubit_tensor(rho)
    if subsystem == "control":
        return tensor.transpose(2, 1, 0, 3).reshape(4, 4)
    if subsystem == "auxiliary":
        return tensor.transpose(0, 3, 2, 1).reshape(4, 4)
    raise ValueError(f"unknown subsystem {subsystem!r}")


def psd_sqrt(m: ArrayLike) -> ComplexMatrix:
    values, vectors = hermitian_eig(m)
    if values[-1] < SQRT_REJECT_FLOOR:
        raise ValueError(f"matrix has negative eigenvalue {values[-1]:.3e}")
    roots = np.sqrt(np.clip(values, 0.0, None))
    return hermitize((vectors * roots) @ vectors.conj().T)


def purity(rho: ArrayLike) -> float:
    mat = as_density_matrix(rho, check_spectrum=False)
    return float(np.sum(np.abs(mat) ** 2))


def fidelity(rho1: ArrayLike, rho2: ArrayLike) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))**2."""
    first = as_density_matrix(rho1, check_spectrum=False)
    second = as_density_matrix(rho2, check_spectrum=False)
    if first.shape != second.shape:
        raise ValueError(f"dimension mismatch: {first.shape} vs {second.shape}")
    root = psd_sqrt(first)
    values, _ = hermitian_eig(hermitize(root @ second @ root))
    value = float(np.sum(np.sqrt(np.clip(values, 0.0, None)))) ** 2
    return min(max(value, 0.0), 1.0)
