"""Filter optimization and iterative purification of the auxiliary qubit."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize

from dqc1.circuit import (
    MAXIMALLY_MIXED_QUBIT,
    FilterSpec,
    apply_filter,
    control_blocks,
    dqc1_output,
    filtered_aux_purity,
)
from dqc1.correlations import measure_all
from dqc1.qla import (
    DensityMatrix,
    UnitaryMatrix,
    as_density_matrix,
    normalize_state,
    partial_trace,
    purity,
)
from dqc1.sampling import ControlSamplerKind, RngStream, draw_circuit_inputs

TARGET_PURITY = 0.99
MAX_STEPS = 50
CONVERGENCE_SLACK = 1e-6
PURITY_TIE_TOL = 1e-9
SIMPLEX_TOL = 1e-6
MAX_EVALUATIONS = 500
POLISHED_STARTS = 4
GRID_DIRECTIONS = 64
# Free-eta search keeps eta in [MIN_STEP_ETA, 1]. A rank-one projector (eta = 0)
# purifies the auxiliary qubit in one step by collapsing the control onto a
# product state; the floor makes each step a partial purification.
MIN_STEP_ETA = 0.65
# Start positions inside [min_eta, 1] as fractions of that interval.
ETA_START_FRACTIONS = (0.0, 0.25, 0.5, 0.75)
_LOGIT_BOUND = 30.0

# +z, -z, +x, -x, +y, -y
_AXIS_ANGLES = (
    (0.0, 0.0),
    (math.pi, 0.0),
    (math.pi / 2.0, 0.0),
    (math.pi / 2.0, math.pi),
    (math.pi / 2.0, math.pi / 2.0),
    (math.pi / 2.0, 3.0 * math.pi / 2.0),
)

Mapper = Callable[[Callable[[int], float], Iterable[int]], Iterator[float]]


class OptimizationError(RuntimeError):
    """No candidate filter leaves a normalizable state."""


@dataclass(frozen=True)
class PurificationStep:
    step_index: int
    filter: FilterSpec
    success_probability: float
    aux_purity: float
    bell: float
    negativity: float
    discord: float
    coherence: float


@dataclass
class PurificationTrace:
    rho0: DensityMatrix
    u1: UnitaryMatrix
    steps: list[PurificationStep] = field(default_factory=list)
    converged: bool = False

    @property
    def step_count(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class EtaPurity:
    eta: float
    mean: float
    stderr: float
    purities: tuple[float, ...]


@dataclass(frozen=True)
class _Candidate:
    eta: float
    theta: float
    phi: float
    purity: float


def fibonacci_directions(count: int = GRID_DIRECTIONS) -> NDArray[np.float64]:
    """(theta, phi) pairs spread evenly over the Bloch sphere."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    k = np.arange(count)
    theta = np.arccos(1.0 - (2.0 * k + 1.0) / count)
    phi = np.mod(k * golden, 2.0 * math.pi)
    return np.column_stack([theta, phi])


def _kets(theta: ArrayLike, phi: ArrayLike) -> NDArray[np.complex128]:
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    return np.column_stack([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])


def _sigmoid(x: float, low: float) -> float:
    x = max(-_LOGIT_BOUND, min(_LOGIT_BOUND, x))
    return low + (1.0 - low) / (1.0 + math.exp(-x))


def _logit(eta: float, low: float) -> float:
    fraction = (eta - low) / (1.0 - low)
    if fraction <= 0.0:
        return -_LOGIT_BOUND
    if fraction >= 1.0:
        return _LOGIT_BOUND
    return max(-_LOGIT_BOUND, min(_LOGIT_BOUND, math.log(fraction / (1.0 - fraction))))


def _better(a: _Candidate, b: _Candidate) -> bool:
    if a.purity > b.purity + PURITY_TIE_TOL:
        return True
    if abs(a.purity - b.purity) <= PURITY_TIE_TOL:
        return a.eta > b.eta
    return False


def _start_grid(eta: Optional[float], min_eta: float) -> NDArray[np.float64]:
    directions = np.vstack([fibonacci_directions(), np.array(_AXIS_ANGLES)])
    if eta is not None:
        return np.column_stack([np.full(len(directions), eta), directions])
    rows = [
        np.column_stack([np.full(len(directions), min_eta + (1.0 - min_eta) * fraction), directions])
        for fraction in ETA_START_FRACTIONS
    ]
    rows.append(np.array([[1.0, 0.0, 0.0]]))
    return np.vstack(rows)


def _screen(blocks: NDArray[np.complex128], eta: Optional[float], min_eta: float) -> list[_Candidate]:
    grid = _start_grid(eta, min_eta)
    purities, _ = filtered_aux_purity(blocks, grid[:, 0], _kets(grid[:, 1], grid[:, 2]))
    candidates = [
        _Candidate(eta=float(e), theta=float(t), phi=float(p), purity=float(value))
        for (e, t, p), value in zip(grid, purities)
        if np.isfinite(value)
    ]
    candidates.sort(key=lambda c: (-c.purity, -c.eta))
    return candidates


def _polish(
    blocks: NDArray[np.complex128],
    start: _Candidate,
    eta: Optional[float],
    min_eta: float,
) -> _Candidate:
    def unpack(x: NDArray[np.float64]) -> tuple[float, float, float]:
        if eta is None:
            return _sigmoid(float(x[2]), min_eta), float(x[0]), float(x[1])
        return eta, float(x[0]), float(x[1])

    def objective(x: NDArray[np.float64]) -> float:
        e, theta, phi = unpack(x)
        value, _ = filtered_aux_purity(blocks, e, _kets([theta], [phi]))
        # Annihilated points score below every feasible purity.
        return 0.0 if not np.isfinite(value[0]) else -float(value[0])

    x0 = [start.theta, start.phi]
    if eta is None:
        x0.append(_logit(start.eta, min_eta))
    result = minimize(
        objective,
        np.array(x0),
        method="Nelder-Mead",
        options={"xatol": SIMPLEX_TOL, "fatol": 1e-12, "maxfev": MAX_EVALUATIONS},
    )
    e, theta, phi = unpack(result.x)
    return _Candidate(eta=e, theta=theta, phi=phi, purity=-float(result.fun))


def optimize_filter(
    rho_bf: ArrayLike,
    eta: Optional[float] = None,
    min_eta: float = MIN_STEP_ETA,
) -> tuple[FilterSpec, float]:
    """Filter maximizing the purity of the post-selected auxiliary qubit.

    ``eta=None`` searches (theta, phi, eta) with eta in [min_eta, 1]; a number
    fixes eta and searches the direction only (``min_eta`` is then unused).
    Among filters within PURITY_TIE_TOL the larger eta (higher success
    probability) wins.
    """
    state = as_density_matrix(rho_bf, check_spectrum=False)
    if state.shape != (4, 4):
        raise ValueError(f"expected a two-qubit state, got {state.shape}")
    if eta is not None and not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not 0.0 <= min_eta < 1.0:
        raise ValueError(f"min_eta must lie in [0, 1), got {min_eta}")
    blocks = control_blocks(state)
    starts = _screen(blocks, eta, min_eta)
    if not starts:
        raise OptimizationError("every candidate filter annihilates the state")
    best = starts[0]
    for candidate in starts[1:]:
        if _better(candidate, best):
            best = candidate
    for start in starts[:POLISHED_STARTS]:
        polished = _polish(blocks, start, eta, min_eta)
        if np.isfinite(polished.purity) and polished.purity > 0.0 and _better(polished, best):
            best = polished
    spec = FilterSpec.from_angles(best.eta, best.theta, best.phi)
    return spec, best.purity


def max_purity_for_sample(
    index: int,
    *,
    eta: float,
    seed: int,
    kind: ControlSamplerKind,
    alpha: Optional[float] = None,
) -> float:
    rho0, u1 = draw_circuit_inputs(RngStream(seed, index), kind, alpha)
    _, value = optimize_filter(dqc1_output(rho0, u1), eta)
    return value


def avg_max_purity_vs_eta(
    eta_grid: Sequence[float],
    samples: int,
    kind: ControlSamplerKind = "pure-haar",
    seed: int = 0,
    alpha: Optional[float] = None,
    mapper: Mapper = map,
) -> list[EtaPurity]:
    """Mean over (rho0, U1) draws of the optimal auxiliary purity at each fixed eta.

    Sample ``i`` uses stream ``i`` for every eta, so the grid is compared on
    common draws. ``mapper`` must preserve input order.
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    rows: list[EtaPurity] = []
    for eta in eta_grid:
        worker = partial(max_purity_for_sample, eta=float(eta), seed=seed, kind=kind, alpha=alpha)
        purities = np.array(list(mapper(worker, range(samples))), dtype=np.float64)
        stderr = float(purities.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        rows.append(
            EtaPurity(
                eta=float(eta),
                mean=float(purities.mean()),
                stderr=stderr,
                purities=tuple(float(p) for p in purities),
            )
        )
        logging.info("eta=%.3f mean max purity %.6f (n=%d)", eta, rows[-1].mean, samples)
    return rows


def purification_run(
    rho0: ArrayLike,
    u1: ArrayLike,
    target_purity: float = TARGET_PURITY,
    max_steps: int = MAX_STEPS,
    min_eta: float = MIN_STEP_ETA,
) -> PurificationTrace:
    """Repeat filter optimization, feeding the purified auxiliary state back in.

    A step that cannot raise the purity would repeat forever on the same
    input, so the run stops there unconverged.
    """
    if not 0.5 < target_purity < 1.0:
        raise ValueError(f"target_purity must lie in (0.5, 1), got {target_purity}")
    if max_steps < 1:
        raise ValueError(f"max_steps must be at least 1, got {max_steps}")
    control = as_density_matrix(rho0)
    unitary = np.asarray(u1, dtype=np.complex128)
    trace = PurificationTrace(rho0=control, u1=unitary)
    aux = MAXIMALLY_MIXED_QUBIT.copy()
    for step_index in range(1, max_steps + 1):
        previous = purity(aux)
        rho_bf = dqc1_output(control, unitary, aux)
        spec, _ = optimize_filter(rho_bf, min_eta=min_eta)
        filtered = apply_filter(rho_bf, spec)
        aux = normalize_state(partial_trace(filtered.state, keep="auxiliary"))
        profile = measure_all(filtered.state)
        step = PurificationStep(
            step_index=step_index,
            filter=spec,
            success_probability=filtered.success_probability,
            aux_purity=purity(aux),
            bell=profile.bell,
            negativity=profile.negativity,
            discord=profile.discord,
            coherence=profile.coherence,
        )
        trace.steps.append(step)
        logging.debug(
            "step %d: eta=%.4f purity=%.6f success=%.4f",
            step_index,
            spec.eta,
            step.aux_purity,
            step.success_probability,
        )
        if step.aux_purity >= target_purity - CONVERGENCE_SLACK:
            break
        if step.aux_purity <= previous + PURITY_TIE_TOL:
            logging.debug("step %d left the purity at %.6f; stopping", step_index, step.aux_purity)
            break
    trace.converged = trace.steps[-1].aux_purity >= target_purity - CONVERGENCE_SLACK
    return trace
