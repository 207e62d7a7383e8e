"""Fano decomposition and two-qubit correlation measures.

Subsystem A is the control qubit throughout: ``s`` is its Bloch vector and
the rows of ``C`` are indexed by its Pauli operators. Geometric discord is
measured on A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dqc1.qla import (
    HERMITIAN_TOL,
    IDENTITY_2,
    PAULIS,
    TRACE_TOL,
    DensityMatrix,
    as_density_matrix,
    hermitian_eigvals,
    normalize_state,
    partial_trace,
)

Measure = Literal["bell", "negativity", "discord", "coherence"]

RANGE_TOL = 1e-9
CHSH_BOUND = 2.0
BELL_VIOLATION_TOL = 1e-9
MEASURE_MAXIMA: dict[str, float] = {
    "bell": 2.0 * math.sqrt(2.0),
    "negativity": 0.5,
    "discord": 0.5,
    "coherence": 3.0,
}

# sigma_mu (x) sigma_nu for mu, nu in 0..3
_PAULI_BASIS = np.array(
    [[np.kron(a, b) for b in (IDENTITY_2, *PAULIS)] for a in (IDENTITY_2, *PAULIS)]
)


@dataclass(frozen=True)
class FanoDecomposition:
    s: NDArray[np.float64]
    r: NDArray[np.float64]
    C: NDArray[np.float64]


@dataclass(frozen=True)
class CorrelationProfile:
    bell: float
    negativity: float
    discord: float
    coherence: float

    def normalized(self) -> "CorrelationProfile":
        return CorrelationProfile(
            bell=normalize_correlation(self.bell, "bell"),
            negativity=normalize_correlation(self.negativity, "negativity"),
            discord=normalize_correlation(self.discord, "discord"),
            coherence=normalize_correlation(self.coherence, "coherence"),
        )


def _two_qubit_state(rho: ArrayLike) -> DensityMatrix:
    state = as_density_matrix(rho, check_spectrum=False)
    if state.shape != (4, 4):
        raise ValueError(f"expected a two-qubit state, got {state.shape}")
    return state


def _two_qubit_stack(states: ArrayLike) -> NDArray[np.complex128]:
    stack = np.asarray(states, dtype=np.complex128)
    if stack.ndim != 3 or stack.shape[1:] != (4, 4):
        raise ValueError(f"expected a stack of two-qubit states, got shape {stack.shape}")
    if not np.all(np.isfinite(stack)):
        raise ValueError("state stack has non-finite entries")
    residual = float(np.max(np.abs(stack - np.conj(np.swapaxes(stack, 1, 2))), initial=0.0))
    if residual > HERMITIAN_TOL:
        raise ValueError(f"state stack is not Hermitian (residual {residual:.3e})")
    traces = np.trace(stack, axis1=1, axis2=2)
    if np.any(np.abs(traces - 1.0) > TRACE_TOL):
        raise ValueError("state stack has a member whose trace differs from 1")
    return stack


def _fano_stack(stack: NDArray[np.complex128]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    values = np.einsum("mnij,kji->kmn", _PAULI_BASIS, stack).real
    return values[:, 1:, 0], values[:, 1:, 1:]


def _bell_values(c: NDArray[np.float64]) -> NDArray[np.float64]:
    values = hermitian_eigvals(c @ np.swapaxes(c, 1, 2))
    return 2.0 * np.sqrt(np.maximum(values[:, 0] + values[:, 1], 0.0))


def _negativity_values(stack: NDArray[np.complex128]) -> NDArray[np.float64]:
    transposed = stack.reshape(-1, 2, 2, 2, 2).transpose(0, 3, 2, 1, 4).reshape(-1, 4, 4)
    norms = np.sum(np.abs(hermitian_eigvals(transposed)), axis=1)
    return np.maximum((norms - 1.0) / 2.0, 0.0)


def _discord_values(s: NDArray[np.float64], c: NDArray[np.float64]) -> NDArray[np.float64]:
    lam = s[:, :, None] * s[:, None, :] + c @ np.swapaxes(c, 1, 2)
    largest = hermitian_eigvals(lam)[:, 0]
    value = (np.sum(s**2, axis=1) + np.sum(c**2, axis=(1, 2)) - largest) / 4.0
    return np.maximum(value, 0.0)


def _coherence_values(stack: NDArray[np.complex128]) -> NDArray[np.float64]:
    magnitudes = np.abs(stack)
    diagonal = np.diagonal(magnitudes, axis1=-2, axis2=-1)
    return np.sum(magnitudes, axis=(-2, -1)) - np.sum(diagonal, axis=-1)


def fano_decompose(rho: ArrayLike) -> FanoDecomposition:
    state = _two_qubit_state(rho)
    values = np.einsum("mnij,ji->mn", _PAULI_BASIS, state).real
    return FanoDecomposition(
        s=values[1:, 0].copy(),
        r=values[0, 1:].copy(),
        C=values[1:, 1:].copy(),
    )


def fano_reconstruct(decomposition: FanoDecomposition) -> DensityMatrix:
    coefficients = np.zeros((4, 4))
    coefficients[0, 0] = 1.0
    coefficients[1:, 0] = decomposition.s
    coefficients[0, 1:] = decomposition.r
    coefficients[1:, 1:] = decomposition.C
    return normalize_state(np.einsum("mn,mnij->ij", coefficients, _PAULI_BASIS) / 4.0)


def bell_quantity(rho: ArrayLike) -> float:
    """Horodecki value 2 sqrt(m1 + m2) of T = C C^T; above 2 signals CHSH violation."""
    _, c = _fano_stack(_two_qubit_state(rho)[None])
    return float(_bell_values(c)[0])


def negativity(rho: ArrayLike) -> float:
    return float(_negativity_values(_two_qubit_state(rho)[None])[0])


def geometric_discord(rho: ArrayLike) -> float:
    s, c = _fano_stack(_two_qubit_state(rho)[None])
    return float(_discord_values(s, c)[0])


def l1_coherence(rho: ArrayLike) -> float:
    state = as_density_matrix(rho, check_spectrum=False)
    return float(_coherence_values(state))


def control_coherence(rho: ArrayLike) -> float:
    """l1 coherence of the control qubit alone, in [0, 1].

    The unfiltered circuit's readout lives in this qubit; its maximum over
    random circuits is the coherence reference of the density-of-states study.
    """
    return l1_coherence(partial_trace(_two_qubit_state(rho), keep="control"))


def control_coherences(states: ArrayLike) -> NDArray[np.float64]:
    """``control_coherence`` of every member of a (k, 4, 4) stack."""
    stack = _two_qubit_stack(states)
    controls = np.einsum("kijlj->kil", stack.reshape(-1, 2, 2, 2, 2))
    return _coherence_values(controls)


def violates_bell(bell: float) -> bool:
    """B above the CHSH bound, beyond round-off."""
    return bell > CHSH_BOUND + BELL_VIOLATION_TOL


def normalize_correlation(value: float, which: Measure) -> float:
    """X / X_max, rejecting values outside the measure's range."""
    try:
        maximum = MEASURE_MAXIMA[which]
    except KeyError:
        raise ValueError(f"unknown measure {which!r}") from None
    if not -RANGE_TOL <= value <= maximum + RANGE_TOL:
        raise ValueError(f"{which} value {value} outside [0, {maximum}]")
    return min(max(value / maximum, 0.0), 1.0)


def measure_batch(states: ArrayLike) -> list[CorrelationProfile]:
    """Profiles of a (k, 4, 4) stack, equal to ``measure_all`` on each member."""
    stack = _two_qubit_stack(states)
    if stack.shape[0] == 0:
        return []
    s, c = _fano_stack(stack)
    columns = zip(
        _bell_values(c),
        _negativity_values(stack),
        _discord_values(s, c),
        _coherence_values(stack),
    )
    return [
        CorrelationProfile(bell=float(b), negativity=float(n), discord=float(d), coherence=float(h))
        for b, n, d, h in columns
    ]


def measure_all(rho: ArrayLike) -> CorrelationProfile:
    return measure_batch(_two_qubit_state(rho)[None])[0]
