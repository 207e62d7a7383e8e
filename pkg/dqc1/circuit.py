"""Two-qubit DQC1 circuit, post-selection filter and trace readout."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dqc1.qla import (
    IDENTITY_2,
    SIGMA_Y,
    SIGMA_Z,
    ComplexMatrix,
    DensityMatrix,
    UnitaryMatrix,
    as_density_matrix,
    as_unitary,
    dagger,
    kron,
    normalize_state,
    partial_trace,
)
from dqc1.sampling import control_state

ANNIHILATION_THRESHOLD = 1e-12
_COMPOSED_UNITARY_TOL = 1e-10
MAXIMALLY_MIXED_QUBIT = IDENTITY_2 / 2.0


class FilterAnnihilationError(ValueError):
    """The filter removes (numerically) all weight from the state."""


@dataclass(frozen=True)
class FilterSpec:
    """F = eta I + (1 - eta)|u><u| with |u> = (cos(theta/2), e^{i phi} sin(theta/2))."""

    eta: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")

    @classmethod
    def identity(cls) -> "FilterSpec":
        return cls(eta=1.0)

    @classmethod
    def from_angles(cls, eta: float, theta: float, phi: float) -> "FilterSpec":
        """Build a spec from unconstrained angles, folding them into range."""
        theta, phi = canonical_angles(theta, phi)
        return cls(eta=eta, theta=theta, phi=phi)

    def direction(self) -> NDArray[np.complex128]:
        return bloch_ket(self.theta, self.phi)


@dataclass(frozen=True)
class FilteredState:
    state: DensityMatrix
    success_probability: float


def bloch_ket(theta: float, phi: float) -> NDArray[np.complex128]:
    return np.array(
        [math.cos(theta / 2.0), np.exp(1j * phi) * math.sin(theta / 2.0)],
        dtype=np.complex128,
    )


def canonical_angles(theta: float, phi: float) -> tuple[float, float]:
    """Map any (theta, phi) to the same Bloch direction with theta in [0, pi], phi in [0, 2pi)."""
    sin_theta = math.sin(theta)
    x = sin_theta * math.cos(phi)
    y = sin_theta * math.sin(phi)
    z = math.cos(theta)
    folded_theta = math.acos(max(-1.0, min(1.0, z)))
    if math.hypot(x, y) < 1e-15:
        return folded_theta, 0.0
    folded_phi = math.atan2(y, x) % (2.0 * math.pi)
    if folded_phi >= 2.0 * math.pi:
        folded_phi = 0.0
    return folded_theta, folded_phi


def hadamard() -> UnitaryMatrix:
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2.0)


def controlled_u(u1: ArrayLike) -> UnitaryMatrix:
    """|0><0| (x) I + |1><1| (x) u1."""
    target = as_unitary(u1, tol=_COMPOSED_UNITARY_TOL)
    if target.shape != (2, 2):
        raise ValueError(f"controlled_u expects a 2x2 unitary, got {target.shape}")
    gate = np.zeros((4, 4), dtype=np.complex128)
    gate[:2, :2] = IDENTITY_2
    gate[2:, 2:] = target
    return gate


def circuit_unitary(u1: ArrayLike) -> UnitaryMatrix:
    """(H (x) I) CU (H (x) I), the full gate sequence before filtering."""
    local = kron(hadamard(), IDENTITY_2)
    return local @ controlled_u(u1) @ local


def dqc1_output(
    rho0: ArrayLike,
    u1: ArrayLike,
    aux: Optional[ArrayLike] = None,
) -> DensityMatrix:
    """State before filtering; ``aux`` defaults to the maximally mixed qubit."""
    control = as_density_matrix(rho0)
    auxiliary = as_density_matrix(MAXIMALLY_MIXED_QUBIT if aux is None else aux)
    if control.shape != (2, 2) or auxiliary.shape != (2, 2):
        raise ValueError("control and auxiliary states must be single-qubit")
    gate = circuit_unitary(u1)
    output = normalize_state(gate @ kron(control, auxiliary) @ dagger(gate))
    return as_density_matrix(output, check_spectrum=False)


def filter_matrix(spec: FilterSpec) -> ComplexMatrix:
    u = spec.direction()
    return spec.eta * IDENTITY_2 + (1.0 - spec.eta) * np.outer(u, u.conj())


def filter_from_unitary(u_a: ArrayLike, eta: float) -> FilterSpec:
    """Spec for F(U_a, eta); only the first column of U_a matters."""
    unitary = as_unitary(u_a, tol=_COMPOSED_UNITARY_TOL)
    if unitary.shape != (2, 2):
        raise ValueError(f"U_a must be 2x2, got {unitary.shape}")
    c0, c1 = unitary[:, 0]
    coherence = c0.conjugate() * c1
    theta = math.atan2(2.0 * abs(coherence), abs(c0) ** 2 - abs(c1) ** 2)
    return FilterSpec.from_angles(eta, theta, float(np.angle(coherence)))


def apply_filter(rho_bf: ArrayLike, spec: FilterSpec) -> FilteredState:
    """Post-select with F on the control qubit and renormalize."""
    state = as_density_matrix(rho_bf, check_spectrum=False)
    if state.shape != (4, 4):
        raise ValueError(f"filter acts on two-qubit states, got {state.shape}")
    local = kron(filter_matrix(spec), IDENTITY_2)
    unnormalized = local @ state @ dagger(local)
    probability = float(np.trace(unnormalized).real)
    if probability < ANNIHILATION_THRESHOLD:
        raise FilterAnnihilationError(
            f"filter success probability {probability:.3e} below {ANNIHILATION_THRESHOLD}"
        )
    filtered = normalize_state(unnormalized / probability)
    return FilteredState(
        state=as_density_matrix(filtered, check_spectrum=False),
        success_probability=min(probability, 1.0),
    )


def control_blocks(rho_bf: ArrayLike) -> NDArray[np.complex128]:
    """blocks[i, j] = (<i| (x) I) rho (|j> (x) I), each a 2x2 auxiliary operator."""
    state = np.asarray(rho_bf, dtype=np.complex128)
    return state.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)


def filtered_aux_purity(
    blocks: NDArray[np.complex128],
    eta: ArrayLike,
    directions: ArrayLike,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Auxiliary purity and success probability for a batch of filters.

    Uses tr_c[(F (x) I) rho (F (x) I)] = tr_c[(F^2 (x) I) rho] with
    F^2 = eta^2 I + (1 - eta^2)|u><u|. Annihilated candidates get NaN purity.
    """
    etas = np.atleast_1d(np.asarray(eta, dtype=np.float64))
    kets = np.atleast_2d(np.asarray(directions, dtype=np.complex128))
    weight = etas**2
    marginal = blocks[0, 0] + blocks[1, 1]
    projected = np.einsum("ki,kj,ijab->kab", kets.conj(), kets, blocks)
    aux = weight[:, None, None] * marginal + (1.0 - weight)[:, None, None] * projected
    probability = np.real(np.trace(aux, axis1=1, axis2=2))
    squared = np.sum(np.abs(aux) ** 2, axis=(1, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        purity = np.where(
            probability >= ANNIHILATION_THRESHOLD,
            squared / probability**2,
            np.nan,
        )
    return purity, probability


def aux_purity_after_filter(rho_bf: ArrayLike, spec: FilterSpec) -> float:
    purity, probability = filtered_aux_purity(
        control_blocks(rho_bf), spec.eta, spec.direction()
    )
    if probability[0] < ANNIHILATION_THRESHOLD:
        raise FilterAnnihilationError(
            f"filter success probability {probability[0]:.3e} below {ANNIHILATION_THRESHOLD}"
        )
    return float(purity[0])


def control_expectations(rho: ArrayLike) -> tuple[float, float]:
    """<sigma_z> and <sigma_y> of the control qubit."""
    control = partial_trace(rho, keep="control")
    return (
        float(np.trace(control @ SIGMA_Z).real),
        float(np.trace(control @ SIGMA_Y).real),
    )


def normalized_trace_estimate(alpha: float, u1: ArrayLike) -> complex:
    """tr(u1)/2 read from the control qubit.

    After the trailing Hadamard, <sigma_z> carries alpha Re tr(u1)/2 and
    <sigma_y> carries -alpha Im tr(u1)/2.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    rho_bf = dqc1_output(control_state(alpha), u1)
    z_expectation, y_expectation = control_expectations(rho_bf)
    return complex(z_expectation, -y_expectation) / alpha
