"""Invariant suite behind ``dqc1 validate``.

Every check draws from its own seeded streams, so a failure reproduces
exactly on re-run. ``full=True`` uses acceptance-scale sample counts.
"""

from __future__ import annotations

import logging
import math
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import ks_2samp

from dqc1.circuit import (
    FilterSpec,
    apply_filter,
    dqc1_output,
    filter_from_unitary,
    normalized_trace_estimate,
)
from dqc1.correlations import (
    bell_quantity,
    fano_decompose,
    fano_reconstruct,
    geometric_discord,
    l1_coherence,
    negativity,
    violates_bell,
)
from dqc1.purifier import MIN_STEP_ETA, optimize_filter, purification_run
from dqc1.qla import (
    IDENTITY_2,
    SIGMA_Z,
    dagger,
    fidelity,
    is_density_matrix,
    kron,
    partial_trace,
    partial_transpose,
    psd_sqrt,
    purity,
    trace_norm,
)
from dqc1.sampling import (
    RngStream,
    control_state,
    draw_circuit_inputs,
    haar_pure_state,
    haar_unitary,
    hs_mixed_state,
    partial_trace_pure_state,
)
from harness.core import ExperimentRunner
from harness.emitter import record_sort_key
from harness.experiments import (
    SCATTER_CHUNK,
    STANDARD_MAXIMA,
    run_density_of_states,
    scatter_chunk,
)
from shared_lib.schema import config_from_dict

VALIDATION_SEED = 0x5EED
EXPECTED_MEAN_STEPS = 12.0
MIN_STATISTICAL_RUNS = 10
COUNTING_SLACK = 3.0


@dataclass(frozen=True)
class Scale:
    states: int
    haar: int
    ks_threshold: float
    moment_tolerance: float
    purification_runs: int
    random_filters: int
    discord_floor: float
    coherence_floor: float
    step_tolerance: float


DESK = Scale(
    states=2_000,
    haar=5_000,
    ks_threshold=0.05,
    moment_tolerance=0.02,
    purification_runs=20,
    random_filters=1_000,
    discord_floor=0.10,
    coherence_floor=0.95,
    step_tolerance=6.0,
)
FULL = Scale(
    states=100_000,
    haar=100_000,
    ks_threshold=0.02,
    moment_tolerance=0.005,
    purification_runs=100,
    random_filters=1_000,
    discord_floor=0.10,
    coherence_floor=0.95,
    step_tolerance=4.0,
)


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(message)


def _close(actual: float | complex, expected: float | complex, tol: float = 1e-9) -> bool:
    return abs(actual - expected) <= tol


def _bell_state() -> np.ndarray:
    ket = np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2.0)
    return np.outer(ket, ket.conj())


def _werner(p: float) -> np.ndarray:
    return p * _bell_state() + (1.0 - p) * np.eye(4, dtype=np.complex128) / 4.0


def _stream(check: int, index: int) -> np.random.Generator:
    return RngStream(VALIDATION_SEED + check, index).generator()


def _ket_unitary(ket: np.ndarray) -> np.ndarray:
    a, b = ket
    return np.array([[a, -b.conjugate()], [b, a.conjugate()]], dtype=np.complex128)


def check_analytic_oracles(scale: Scale) -> None:
    bell = _bell_state()
    _expect(_close(bell_quantity(bell), 2.0 * math.sqrt(2.0)), "Bell state B != 2 sqrt 2")
    _expect(_close(negativity(bell), 0.5), "Bell state N != 1/2")
    _expect(_close(geometric_discord(bell), 0.5), "Bell state D != 1/2")
    _expect(_close(l1_coherence(bell), 1.0), "Bell state coherence != 1")
    mixed = np.eye(4, dtype=np.complex128) / 4.0
    for measure in (bell_quantity, negativity, geometric_discord, l1_coherence):
        _expect(_close(measure(mixed), 0.0), f"{measure.__name__} of I/4 != 0")
    _expect(_close(negativity(_werner(0.5)), 0.125), "Werner(0.5) N != 1/8")
    for alpha in (0.0, 0.3, 1.0):
        decomposition = fano_decompose(kron(control_state(alpha), IDENTITY_2 / 2.0))
        _expect(np.allclose(decomposition.s, [0.0, 0.0, alpha], atol=1e-12), "s != (0, 0, alpha)")
    oracles = ((IDENTITY_2, 1.0), (SIGMA_Z, 0.0), (np.diag([1.0, 1j]), 0.5 + 0.5j))
    for u1, expected in oracles:
        _expect(_close(normalized_trace_estimate(1.0, u1), expected), f"trace estimate of {u1}")


def check_state_invariants(scale: Scale) -> None:
    for index in range(scale.states // 10):
        gen = _stream(1, index)
        rho0, u1 = draw_circuit_inputs(gen, "mixed-hs")
        rho_bf = dqc1_output(rho0, u1)
        spec = filter_from_unitary(haar_unitary(2, gen), float(gen.uniform()))
        filtered = apply_filter(rho_bf, spec)
        for state in (rho0, rho_bf, filtered.state, hs_mixed_state(4, gen), haar_pure_state(4, gen)):
            _expect(is_density_matrix(state), f"sample {index}: density invariants violated")
        _expect(0.0 < filtered.success_probability <= 1.0, "success probability outside (0, 1]")
        _expect(abs(np.trace(filtered.state) - 1.0) <= 1e-12, "filtered trace != 1")
        _expect(trace_norm(partial_transpose(rho_bf, "control")) >= 1.0 - 1e-12, "PT norm < 1")
        reconstructed = fano_reconstruct(fano_decompose(filtered.state))
        _expect(np.allclose(reconstructed, filtered.state, atol=1e-10), "Fano reconstruction")


def check_sqrt_and_fidelity(scale: Scale) -> None:
    for index in range(scale.states // 10):
        gen = _stream(2, index)
        first, second = hs_mixed_state(4, gen), hs_mixed_state(4, gen)
        root = psd_sqrt(first)
        _expect(np.allclose(root @ root, first, atol=1e-9), "psd_sqrt squared != input")
        forward, backward = fidelity(first, second), fidelity(second, first)
        _expect(_close(forward, backward), "fidelity not symmetric")
        v = haar_unitary(4, gen)
        rotated = fidelity(v @ first @ dagger(v), v @ second @ dagger(v))
        _expect(_close(forward, rotated), "fidelity not unitarily invariant")


def check_haar_sampling(scale: Scale) -> None:
    v = haar_unitary(2, _stream(3, 0))
    plain, rotated = [], []
    for index in range(scale.haar):
        u = haar_unitary(2, _stream(4, index))
        _expect(np.max(np.abs(u @ dagger(u) - np.eye(2))) <= 1e-12, "Haar sample not unitary")
        other = haar_unitary(2, _stream(5, index))
        plain.append(abs(u[0, 0]) ** 2)
        rotated.append(abs((v @ other)[0, 0]) ** 2)
    _expect(abs(np.mean(plain) - 0.5) <= scale.moment_tolerance, "Haar moment |U00|^2 != 1/2")
    statistic = ks_2samp(plain, rotated).statistic
    _expect(statistic <= scale.ks_threshold, f"Haar invariance KS statistic {statistic:.4f}")
    again = haar_unitary(2, RngStream(VALIDATION_SEED, 7))
    _expect(np.array_equal(again, haar_unitary(2, RngStream(VALIDATION_SEED, 7))), "not deterministic")


def check_mixed_state_law(scale: Scale) -> None:
    wishart = [purity(hs_mixed_state(2, _stream(6, i))) for i in range(scale.haar)]
    traced = [purity(partial_trace_pure_state(_stream(7, i))) for i in range(scale.haar)]
    gap = abs(np.mean(wishart) - np.mean(traced))
    _expect(gap <= scale.moment_tolerance, f"HS and partial-trace purities differ by {gap:.4f}")


def check_standard_circuit(scale: Scale) -> None:
    for index in range(scale.states // 10):
        rho0, u1 = draw_circuit_inputs(_stream(8, index), "mixed-hs")
        aux = partial_trace(dqc1_output(rho0, u1), keep="auxiliary")
        _expect(np.allclose(aux, IDENTITY_2 / 2.0, atol=1e-12), "auxiliary marginal != I/2")
    records = [
        record
        for block in range(0, scale.states, SCATTER_CHUNK)
        for record in scatter_chunk(
            range(block, min(block + SCATTER_CHUNK, scale.states)),
            seed=VALIDATION_SEED + 8,
            kind="mixed-hs",
            alpha=None,
        )
    ]
    for record in records:
        _expect(_close(record.purity_aux, 0.5, 1e-12), f"sample {record.sample_index}: aux purity != 1/2")
        _expect(record.negativity < 1e-10, f"sample {record.sample_index}: entanglement in standard circuit")
        _expect(record.bell <= 2.0 + 1e-9, f"sample {record.sample_index}: Bell violation")
    top_discord = max(r.discord for r in records)
    top_coherence = max(r.control_coherence for r in records)
    _expect(
        scale.discord_floor <= top_discord <= 0.125 + 1e-9,
        f"max discord {top_discord:.4f} outside [{scale.discord_floor}, 0.125]",
    )
    _expect(
        scale.coherence_floor <= top_coherence <= 1.0 + 1e-6,
        f"max control coherence {top_coherence:.4f} outside [{scale.coherence_floor}, 1]",
    )


def check_circuit_symmetries(scale: Scale) -> None:
    for index in range(scale.states // 20):
        gen = _stream(9, index)
        u1 = haar_unitary(2, gen)
        estimates = [normalized_trace_estimate(a, u1) for a in (0.25, 0.5, 1.0)]
        _expect(all(_close(e, estimates[-1], 1e-10) for e in estimates), "estimate depends on alpha")
        _expect(_close(estimates[-1], np.trace(u1) / 2.0, 1e-12), "estimate != tr(U)/2")
        rho0, u1 = draw_circuit_inputs(gen, "mixed-hs")
        rho_bf = dqc1_output(rho0, u1)
        eta = float(gen.uniform())
        spec = filter_from_unitary(haar_unitary(2, gen), eta)
        v = haar_unitary(2, gen)
        lift = kron(v, IDENTITY_2)
        moved = filter_from_unitary(_ket_unitary(dagger(v) @ spec.direction()), eta)
        inner = apply_filter(dagger(lift) @ rho_bf @ lift, moved).state
        _expect(
            np.allclose(lift @ inner @ dagger(lift), apply_filter(rho_bf, spec).state, atol=1e-10),
            "filter covariance violated",
        )


def check_local_invariance(scale: Scale) -> None:
    for index in range(scale.states // 20):
        gen = _stream(10, index)
        rho = hs_mixed_state(4, gen)
        local = kron(haar_unitary(2, gen), haar_unitary(2, gen))
        moved = local @ rho @ dagger(local)
        for measure in (bell_quantity, negativity, geometric_discord):
            _expect(_close(measure(rho), measure(moved)), f"{measure.__name__} not locally invariant")


def check_purifier(scale: Scale) -> None:
    # With the auxiliary qubit starting at I/2 every step stays separable, so
    # B approaches 2 from below as the auxiliary qubit purifies.
    step_counts, converged, final_bells = [], [], []
    for index in range(scale.purification_runs):
        rho0, u1 = draw_circuit_inputs(_stream(11, index), "pure-haar")
        trace = purification_run(rho0, u1)
        purities = [step.aux_purity for step in trace.steps]
        bells = [step.bell for step in trace.steps]
        _expect(all(b >= a - 1e-9 for a, b in zip(purities, purities[1:])), "purity decreased")
        _expect(all(b >= a - 1e-6 for a, b in zip(bells, bells[1:])), "B decreased along a run")
        for step in trace.steps:
            _expect(0.0 < step.success_probability <= 1.0, "success probability outside (0, 1]")
            _expect(step.filter.eta >= MIN_STEP_ETA - 1e-12, f"step filter eta {step.filter.eta} below floor")
            _expect(step.negativity < 1e-10, f"run {index}: entanglement after post-selection")
            _expect(not violates_bell(step.bell), f"run {index}: Bell violation after post-selection")
        converged.append(trace.converged)
        if trace.converged:
            step_counts.append(trace.step_count)
            final_bells.append(bells[-1])
    if len(converged) >= MIN_STATISTICAL_RUNS:
        share = sum(converged) / len(converged)
        _expect(share >= 0.9, f"only {share:.2f} of purification runs converged")
        mean_steps = float(np.mean(step_counts))
        _expect(
            abs(mean_steps - EXPECTED_MEAN_STEPS) <= scale.step_tolerance,
            f"mean step count {mean_steps:.2f} not within {EXPECTED_MEAN_STEPS} +- {scale.step_tolerance}",
        )
        _expect(float(np.mean(final_bells)) >= 1.95, "purified states far from B = 2")
    gen = _stream(12, 0)
    for _ in range(max(2, scale.purification_runs // 5)):
        rho_bf = dqc1_output(*draw_circuit_inputs(gen, "pure-haar"))
        _, best = optimize_filter(rho_bf)
        for _ in range(scale.random_filters):
            spec = FilterSpec(
                eta=float(gen.uniform(MIN_STEP_ETA, 1.0)),
                theta=float(np.arccos(gen.uniform(-1.0, 1.0))),
                phi=float(gen.uniform(0.0, 2.0 * math.pi)),
            )
            value = purity(partial_trace(apply_filter(rho_bf, spec).state, keep="auxiliary"))
            _expect(best >= value - 1e-6, "random filter beat the optimizer")


def check_density_of_states(scale: Scale) -> None:
    cfg = config_from_dict(
        {
            "experiment": "density-of-states",
            "samples": max(50, scale.states // 10),
            "eta_values": [0.0, 0.5, 1.0],
            "seed": VALIDATION_SEED + 13,
        }
    )
    rows = run_density_of_states(cfg).summary["per_eta"]
    # Allow a rise of a few states; the eta = 1 threshold is itself a sampled maximum.
    slack = COUNTING_SLACK / cfg.samples
    for name in STANDARD_MAXIMA:
        fractions = [row[f"{name}_fraction"] for row in rows]
        _expect(
            all(b <= a + slack for a, b in zip(fractions, fractions[1:])),
            f"{name} fractions increase with eta: {fractions}",
        )
        _expect(fractions[-1] < 0.01, f"{name} fraction {fractions[-1]:.3f} at eta = 1")
    _expect(all(row["bell_fraction"] == 0.0 for row in rows), "post-selected state violates Bell")


def check_determinism(scale: Scale) -> None:
    with tempfile.TemporaryDirectory() as workdir:
        results = []
        for workers in (1, 2):
            cfg = config_from_dict(
                {
                    "experiment": "standard-scatter",
                    "samples": 64,
                    "seed": VALIDATION_SEED,
                    "workers": workers,
                    "output_path": str(Path(workdir) / f"scatter-{workers}.csv"),
                }
            )
            records = ExperimentRunner(cfg).execute().records
            results.append(sorted(records, key=record_sort_key))
        _expect(results[0] == results[1], "records depend on worker count")


CHECKS: tuple[Callable[[Scale], None], ...] = (
    check_analytic_oracles,
    check_state_invariants,
    check_sqrt_and_fidelity,
    check_haar_sampling,
    check_mixed_state_law,
    check_standard_circuit,
    check_circuit_symmetries,
    check_local_invariance,
    check_purifier,
    check_density_of_states,
    check_determinism,
)


def run_validate(full: bool = False) -> tuple[int, int]:
    """Run every check; returns (passed, failed)."""
    scale = FULL if full else DESK
    passed = failed = 0
    for check in CHECKS:
        name = check.__name__.removeprefix("check_")
        try:
            check(scale)
        except AssertionError as exc:
            failed += 1
            logging.error("FAIL %s: %s", name, exc)
        except Exception:  # noqa: BLE001 - report and continue with other checks
            failed += 1
            logging.exception("ERROR %s", name)
        else:
            passed += 1
            logging.info("PASS %s", name)
    return passed, failed
