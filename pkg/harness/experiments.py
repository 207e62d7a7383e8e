"""One function per experiment; each returns records plus a summary.

Workers are module-level so they can be shipped to a process pool. Sample
``i`` always draws from stream ``i`` of the configured seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from dqc1.circuit import (
    FilterAnnihilationError,
    FilterSpec,
    FilteredState,
    apply_filter,
    dqc1_output,
    filter_from_unitary,
)
from dqc1.correlations import (
    MEASURE_MAXIMA,
    control_coherence,
    control_coherences,
    measure_all,
    measure_batch,
    normalize_correlation,
    violates_bell,
)
from dqc1.purifier import (
    MIN_STEP_ETA,
    avg_max_purity_vs_eta,
    optimize_filter,
    purification_run,
)
from dqc1.qla import fidelity, partial_trace, purity
from dqc1.sampling import (
    RngStream,
    draw_circuit_inputs,
    haar_pure_state,
    haar_unitary,
    nmr_state,
)
from harness.emitter import SampleRecord
from shared_lib.schema import ExperimentConfig

Mapper = Callable[[Callable[[int], Any], Iterable[int]], Iterator[Any]]

MEASURES = ("bell", "negativity", "discord", "coherence")
# Largest values reached by the unfiltered circuit over mixed HS controls;
# coherence is the control qubit's.
STANDARD_MAXIMA = {"discord": 0.1244, "coherence": 0.9992, "bell": 1.9974}
# Record field compared against each threshold.
_THRESHOLD_FIELDS = {"discord": "discord", "coherence": "control_coherence", "bell": "bell"}
SCATTER_CHUNK = 500
STEP_PAIRS = (
    ("discord", "bell"),
    ("negativity", "bell"),
    ("coherence", "bell"),
    ("discord", "coherence"),
    ("coherence", "negativity"),
    ("discord", "negativity"),
)


@dataclass
class ExperimentResult:
    records: list[SampleRecord]
    summary: dict[str, Any] = field(default_factory=dict)


def _profile_fields(rho: np.ndarray) -> dict[str, float]:
    profile = measure_all(rho)
    return {name: getattr(profile, name) for name in MEASURES}


def _mean_or_none(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if len(values) else None


def _histogram(values: Sequence[float], bins: int) -> dict[str, Any]:
    counts, edges = np.histogram(np.asarray(values, dtype=np.float64), bins=bins, range=(0.0, 1.0))
    return {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}


def scatter_chunk(
    indices: Sequence[int],
    *,
    seed: int,
    kind: str,
    alpha: Optional[float],
) -> list[SampleRecord]:
    """Unfiltered circuit outputs for a block of sample indices, measured as one stack."""
    states = []
    for index in indices:
        rho0, u1 = draw_circuit_inputs(RngStream(seed, index), kind, alpha)  # type: ignore[arg-type]
        states.append(dqc1_output(rho0, u1))
    if not states:
        return []
    stack = np.array(states)
    auxiliary = np.einsum("kijil->kjl", stack.reshape(-1, 2, 2, 2, 2))
    purities = np.sum(np.abs(auxiliary) ** 2, axis=(1, 2))
    return [
        SampleRecord(
            sample_index=index,
            purity_aux=float(aux_purity),
            control_coherence=float(coherence),
            **{name: getattr(profile, name) for name in MEASURES},
        )
        for index, profile, coherence, aux_purity in zip(
            indices, measure_batch(stack), control_coherences(stack), purities
        )
    ]


def _chunks(samples: int) -> list[range]:
    # Fixed blocks keep the stacks, and so the output, independent of the worker count.
    starts = range(0, samples, SCATTER_CHUNK)
    return [range(start, min(start + SCATTER_CHUNK, samples)) for start in starts]


def run_standard_scatter(cfg: ExperimentConfig, mapper: Mapper = map) -> ExperimentResult:
    kind, alpha = cfg.sampler()
    worker = partial(scatter_chunk, seed=cfg.seed, kind=kind, alpha=alpha)
    records = [record for block in mapper(worker, _chunks(cfg.samples)) for record in block]
    summary: dict[str, Any] = {"control_sampler": kind, "samples": len(records)}
    for name in (*MEASURES, "control_coherence"):
        values = [getattr(r, name) for r in records]
        summary[f"max_{name}"] = float(np.max(values))
        summary[f"mean_{name}"] = float(np.mean(values))
    summary["bell_violations"] = sum(1 for r in records if violates_bell(r.bell))
    return ExperimentResult(records=records, summary=summary)


def _random_filter_draw(
    gen: np.random.Generator,
    eta: float,
    kind: str,
    alpha: Optional[float],
) -> tuple[FilterSpec, FilteredState]:
    rho0, u1 = draw_circuit_inputs(gen, kind, alpha)  # type: ignore[arg-type]
    spec = filter_from_unitary(haar_unitary(2, gen), eta)
    return spec, apply_filter(dqc1_output(rho0, u1), spec)


def fidelity_pair(
    index: int,
    *,
    eta: float,
    seed: int,
    kind: str,
    alpha: Optional[float],
) -> Optional[SampleRecord]:
    gen = RngStream(seed, index).generator()
    try:
        _, first = _random_filter_draw(gen, eta, kind, alpha)
        _, second = _random_filter_draw(gen, eta, kind, alpha)
    except FilterAnnihilationError:
        return None
    return SampleRecord(sample_index=index, eta=eta, fidelity=fidelity(first.state, second.state))


def run_fidelity_benchmark(cfg: ExperimentConfig, mapper: Mapper = map) -> ExperimentResult:
    kind, alpha = cfg.sampler()
    records: list[SampleRecord] = []
    per_eta: list[dict[str, Any]] = []
    for eta in cfg.eta_values:
        worker = partial(fidelity_pair, eta=eta, seed=cfg.seed, kind=kind, alpha=alpha)
        drawn = list(mapper(worker, range(cfg.samples)))
        kept = [r for r in drawn if r is not None]
        if len(kept) < len(drawn):
            logging.warning(
                "eta=%.3f: %d pairs annihilated by the filter and skipped",
                eta,
                len(drawn) - len(kept),
            )
        values = [r.fidelity for r in kept]
        per_eta.append(
            {
                "eta": eta,
                "pairs": len(kept),
                "mean_fidelity": _mean_or_none(values),
                "histogram": _histogram(values, cfg.histogram_bins),
            }
        )
        records.extend(kept)
    return ExperimentResult(records=records, summary={"per_eta": per_eta})


def nmr_pair(index: int, *, epsilon: float, seed: int) -> SampleRecord:
    gen = RngStream(seed, index).generator()
    first = nmr_state(epsilon, haar_pure_state(4, gen))
    second = nmr_state(epsilon, haar_pure_state(4, gen))
    return SampleRecord(sample_index=index, epsilon=epsilon, fidelity=fidelity(first, second))


def run_nmr_fidelity(cfg: ExperimentConfig, mapper: Mapper = map) -> ExperimentResult:
    records: list[SampleRecord] = []
    per_epsilon: list[dict[str, Any]] = []
    for epsilon in cfg.epsilon_values:
        worker = partial(nmr_pair, epsilon=epsilon, seed=cfg.seed)
        drawn = list(mapper(worker, range(cfg.samples)))
        values = [r.fidelity for r in drawn]
        per_epsilon.append(
            {
                "epsilon": epsilon,
                "mean_fidelity": _mean_or_none(values),
                "histogram": _histogram(values, cfg.histogram_bins),
            }
        )
        records.extend(drawn)
    return ExperimentResult(records=records, summary={"per_epsilon": per_epsilon})


def run_purity_vs_eta(cfg: ExperimentConfig, mapper: Mapper = map) -> ExperimentResult:
    kind, alpha = cfg.sampler()
    rows = avg_max_purity_vs_eta(
        cfg.eta_values,
        cfg.samples,
        kind=kind,  # type: ignore[arg-type]
        seed=cfg.seed,
        alpha=alpha,
        mapper=mapper,
    )
    records = [
        SampleRecord(sample_index=index, eta=row.eta, purity_aux=value)
        for row in rows
        for index, value in enumerate(row.purities)
    ]
    summary = {"per_eta": [{"eta": r.eta, "mean": r.mean, "stderr": r.stderr} for r in rows]}
    return ExperimentResult(records=records, summary=summary)


def optimized_filtered_sample(
    index: int,
    *,
    eta: float,
    seed: int,
    kind: str,
    alpha: Optional[float],
) -> SampleRecord:
    """Post-select one draw with the purity-optimal filter at fixed eta."""
    rho0, u1 = draw_circuit_inputs(RngStream(seed, index), kind, alpha)  # type: ignore[arg-type]
    rho_bf = dqc1_output(rho0, u1)
    spec, aux_purity = optimize_filter(rho_bf, eta)
    filtered = apply_filter(rho_bf, spec)
    return SampleRecord(
        sample_index=index,
        eta=eta,
        purity_aux=aux_purity,
        success_probability=filtered.success_probability,
        filter_eta=spec.eta,
        filter_theta=spec.theta,
        filter_phi=spec.phi,
        **_profile_fields(filtered.state),
    )


def _optimized_sweep(cfg: ExperimentConfig, mapper: Mapper) -> dict[float, list[SampleRecord]]:
    kind, alpha = cfg.sampler()
    sweep: dict[float, list[SampleRecord]] = {}
    for eta in cfg.eta_values:
        worker = partial(optimized_filtered_sample, eta=eta, seed=cfg.seed, kind=kind, alpha=alpha)
        sweep[eta] = list(mapper(worker, range(cfg.samples)))
        logging.info("eta=%.3f: %d post-selected states", eta, len(sweep[eta]))
    return sweep


def purity_bins(records: Sequence[SampleRecord], bins: int) -> list[dict[str, Any]]:
    """Per-bin means of the normalized measures over equal-width purity bins on [0.5, 1]."""
    edges = np.linspace(0.5, 1.0, bins + 1)
    purities = np.array([r.purity_aux for r in records], dtype=np.float64)
    positions = np.clip(np.searchsorted(edges, purities, side="right") - 1, 0, bins - 1)
    rows: list[dict[str, Any]] = []
    for b in range(bins):
        members = [r for r, p in zip(records, positions) if p == b]
        row: dict[str, Any] = {
            "purity_low": float(edges[b]),
            "purity_high": float(edges[b + 1]),
            "count": len(members),
        }
        for name in MEASURES:
            normalized = [normalize_correlation(getattr(r, name), name) for r in members]  # type: ignore[arg-type]
            row[f"{name}_normalized"] = _mean_or_none(normalized)
        rows.append(row)
    return rows


def run_correlations_vs_purity(cfg: ExperimentConfig, mapper: Mapper = map) -> ExperimentResult:
    sweep = _optimized_sweep(cfg, mapper)
    records = [record for eta in cfg.eta_values for record in sweep[eta]]
    bins = purity_bins(records, cfg.bins)
    empty = sum(1 for row in bins if row["count"] == 0)
    if empty:
        logging.warning("%d of %d purity bins are empty", empty, cfg.bins)
    return ExperimentResult(records=records, summary={"bins": bins, "maxima": MEASURE_MAXIMA})


def density_sample(
    index: int,
    *,
    eta: float,
    seed: int,
    kind: str,
    alpha: Optional[float],
) -> Optional[SampleRecord]:
    """One circuit post-selected through a Haar-random F(U_a, eta)."""
    try:
        spec, filtered = _random_filter_draw(RngStream(seed, index).generator(), eta, kind, alpha)
    except FilterAnnihilationError:
        return None
    return SampleRecord(
        sample_index=index,
        eta=eta,
        purity_aux=purity(partial_trace(filtered.state, keep="auxiliary")),
        success_probability=filtered.success_probability,
        control_coherence=control_coherence(filtered.state),
        filter_eta=spec.eta,
        filter_theta=spec.theta,
        filter_phi=spec.phi,
        **_profile_fields(filtered.state),
    )


def _above_threshold(record: SampleRecord, name: str) -> bool:
    value = getattr(record, _THRESHOLD_FIELDS[name])
    if name == "bell":
        return value > STANDARD_MAXIMA["bell"] and violates_bell(value)
    return value > STANDARD_MAXIMA[name]


def run_density_of_states(cfg: ExperimentConfig, mapper: Mapper = map) -> ExperimentResult:
    """Share of post-selected states beyond the unfiltered maxima, per eta.

    Bell counts only states with B above the CHSH bound.
    """
    kind, alpha = cfg.sampler()
    records: list[SampleRecord] = []
    per_eta: list[dict[str, Any]] = []
    for eta in cfg.eta_values:
        worker = partial(density_sample, eta=eta, seed=cfg.seed, kind=kind, alpha=alpha)
        drawn = list(mapper(worker, range(cfg.samples)))
        group = [r for r in drawn if r is not None]
        if len(group) < len(drawn):
            logging.warning(
                "eta=%.3f: %d states annihilated by the filter and skipped",
                eta,
                len(drawn) - len(group),
            )
        row: dict[str, Any] = {"eta": eta, "states": len(group)}
        for name in STANDARD_MAXIMA:
            above = sum(1 for r in group if _above_threshold(r, name))
            row[f"{name}_fraction"] = above / len(group) if group else None
        per_eta.append(row)
        records.extend(group)
    return ExperimentResult(
        records=records,
        summary={"control_sampler": kind, "thresholds": STANDARD_MAXIMA, "per_eta": per_eta},
    )


def purification_sample(
    index: int,
    *,
    seed: int,
    kind: str,
    alpha: Optional[float],
    target_purity: float,
    max_steps: int,
    min_step_eta: float = MIN_STEP_ETA,
) -> tuple[list[SampleRecord], bool]:
    rho0, u1 = draw_circuit_inputs(RngStream(seed, index), kind, alpha)  # type: ignore[arg-type]
    trace = purification_run(
        rho0, u1, target_purity=target_purity, max_steps=max_steps, min_eta=min_step_eta
    )
    records = [
        SampleRecord(
            sample_index=index,
            step_index=step.step_index,
            bell=step.bell,
            negativity=step.negativity,
            discord=step.discord,
            coherence=step.coherence,
            purity_aux=step.aux_purity,
            success_probability=step.success_probability,
            filter_eta=step.filter.eta,
            filter_theta=step.filter.theta,
            filter_phi=step.filter.phi,
        )
        for step in trace.steps
    ]
    return records, trace.converged


def _step_summary(runs: Sequence[list[SampleRecord]]) -> list[dict[str, Any]]:
    deepest = max(len(run) for run in runs)
    rows: list[dict[str, Any]] = []
    for depth in range(deepest):
        at_step = [run[depth] for run in runs if len(run) > depth]
        row: dict[str, Any] = {"step_index": depth + 1, "runs": len(at_step)}
        for name in (*MEASURES, "purity_aux"):
            row[f"mean_{name}"] = _mean_or_none([getattr(r, name) for r in at_step])
        row["pairs"] = {
            f"{x}_vs_{y}": [
                _mean_or_none([getattr(r, x) for r in at_step]),
                _mean_or_none([getattr(r, y) for r in at_step]),
            ]
            for x, y in STEP_PAIRS
        }
        rows.append(row)
    return rows


def run_purification(cfg: ExperimentConfig, mapper: Mapper = map) -> ExperimentResult:
    kind, alpha = cfg.sampler()
    worker = partial(
        purification_sample,
        seed=cfg.seed,
        kind=kind,
        alpha=alpha,
        target_purity=cfg.target_purity,
        max_steps=cfg.max_steps,
        min_step_eta=cfg.min_step_eta,
    )
    outcomes = list(mapper(worker, range(cfg.samples)))
    runs = [records for records, _ in outcomes]
    converged = [ok for _, ok in outcomes]
    if not all(converged):
        logging.warning(
            "%d of %d purification runs stopped short of purity %.3f",
            converged.count(False),
            len(converged),
            cfg.target_purity,
        )
    step_counts = [len(run) for run, ok in zip(runs, converged) if ok]
    finals = [run[-1] for run in runs]
    summary = {
        "runs": len(runs),
        "converged_fraction": sum(converged) / len(converged),
        "mean_step_count": _mean_or_none(step_counts),
        "step_counts": [len(run) for run in runs],
        "final_step": {
            "bell_above_2_fraction": sum(1 for r in finals if violates_bell(r.bell)) / len(finals),
            "mean_bell": _mean_or_none([r.bell for r in finals]),
            "mean_normalized_negativity": _mean_or_none(
                [normalize_correlation(r.negativity, "negativity") for r in finals]
            ),
            "mean_coherence": _mean_or_none([r.coherence for r in finals]),
            "mean_purity_aux": _mean_or_none([r.purity_aux for r in finals]),
        },
        "per_step": _step_summary(runs),
    }
    return ExperimentResult(records=[r for run in runs for r in run], summary=summary)


EXPERIMENTS: dict[str, Callable[[ExperimentConfig, Mapper], ExperimentResult]] = {
    "standard-scatter": run_standard_scatter,
    "fidelity-benchmark": run_fidelity_benchmark,
    "purity-vs-eta": run_purity_vs_eta,
    "correlations-vs-purity": run_correlations_vs_purity,
    "density-of-states": run_density_of_states,
    "purification": run_purification,
    "nmr-fidelity": run_nmr_fidelity,
}
