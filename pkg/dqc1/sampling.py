"""Seedable samplers for unitaries and states, plus parametric state families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np

from dqc1.qla import (
    DensityMatrix,
    UnitaryMatrix,
    as_density_matrix,
    normalize_state,
    partial_trace,
)

SEED_LIMIT = 2**64
PURE_STATE_TOL = 1e-9
_DEGENERATE_TRACE = 1e-12

ControlSamplerKind = Literal["pure-haar", "mixed-hs", "alpha"]


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream addressed by (seed, stream_id).

    The stream for a sample depends only on its index, never on which
    worker draws it or in which order.
    """

    seed: int
    stream_id: int

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= value < SEED_LIMIT:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(sequence))


RandomSource = Union[RngStream, np.random.Generator]


def _generator(rng: RandomSource) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def _check_dim(dim: int) -> None:
    if dim not in (2, 4):
        raise ValueError(f"dimension must be 2 or 4, got {dim}")


def _ginibre(dim: int, gen: np.random.Generator) -> np.ndarray:
    real = gen.standard_normal((dim, dim))
    imag = gen.standard_normal((dim, dim))
    return (real + 1j * imag) / np.sqrt(2.0)


def haar_unitary(dim: int, rng: RandomSource) -> UnitaryMatrix:
    """Haar-distributed unitary from a phase-fixed QR of a Ginibre matrix."""
    _check_dim(dim)
    q, r = np.linalg.qr(_ginibre(dim, _generator(rng)))
    diagonal = np.diagonal(r)
    return q * (diagonal / np.abs(diagonal))


def haar_pure_state(dim: int, rng: RandomSource) -> DensityMatrix:
    _check_dim(dim)
    gen = _generator(rng)
    amplitudes = gen.standard_normal(dim) + 1j * gen.standard_normal(dim)
    amplitudes /= np.linalg.norm(amplitudes)
    return normalize_state(np.outer(amplitudes, amplitudes.conj()))


def hs_mixed_state(dim: int, rng: RandomSource) -> DensityMatrix:
    """Hilbert-Schmidt random state G G^dagger / tr(G G^dagger)."""
    _check_dim(dim)
    gen = _generator(rng)
    while True:
        g = _ginibre(dim, gen)
        wishart = g @ g.conj().T
        if np.trace(wishart).real >= _DEGENERATE_TRACE:
            return normalize_state(wishart)


def partial_trace_pure_state(rng: RandomSource) -> DensityMatrix:
    """Qubit marginal of a Haar pure two-qubit state (same law as HS on dim 2)."""
    return normalize_state(partial_trace(haar_pure_state(4, rng), keep="control"))


def control_state(alpha: float) -> DensityMatrix:
    """rho0(alpha) = (I + alpha sigma_z) / 2."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return np.diag([(1.0 + alpha) / 2.0, (1.0 - alpha) / 2.0]).astype(np.complex128)


def nmr_state(epsilon: float, psi: DensityMatrix) -> DensityMatrix:
    """Pseudo-pure state (1 - epsilon) I/4 + epsilon psi."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    pure = as_density_matrix(psi)
    if pure.shape != (4, 4):
        raise ValueError(f"psi must be a two-qubit state, got {pure.shape}")
    if abs(float(np.sum(np.abs(pure) ** 2)) - 1.0) > PURE_STATE_TOL:
        raise ValueError("psi must be a pure state")
    mixed = (1.0 - epsilon) / 4.0 * np.eye(4, dtype=np.complex128) + epsilon * pure
    return normalize_state(mixed)


def sample_control_state(
    kind: ControlSamplerKind,
    rng: RandomSource,
    alpha: Optional[float] = None,
) -> DensityMatrix:
    if kind == "pure-haar":
        return haar_pure_state(2, rng)
    if kind == "mixed-hs":
        return hs_mixed_state(2, rng)
    if kind == "alpha":
        if alpha is None:
            raise ValueError("alpha sampler requires an alpha value")
        return control_state(alpha)
    raise ValueError(f"unknown control sampler {kind!r}")


def draw_circuit_inputs(
    rng: RandomSource,
    kind: ControlSamplerKind,
    alpha: Optional[float] = None,
) -> tuple[DensityMatrix, UnitaryMatrix]:
    """Draw (rho0, U1) for one sample, in that order, from one stream."""
    gen = _generator(rng)
    rho0 = sample_control_state(kind, gen, alpha)
    return rho0, haar_unitary(2, gen)
