"""Experiment runner: configuration loading, worker pool and emission."""

from __future__ import annotations

import json
import logging
import multiprocessing
import os
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional

from harness.emitter import emit
from harness.experiments import EXPERIMENTS, ExperimentResult, Mapper
from shared_lib.schema import ExperimentConfig, config_from_dict

WORKERS_ENV = "DQC1_WORKERS"
_CHUNKS_PER_WORKER = 8


def load_config_file(path: str | Path) -> dict[str, Any]:
    config_path = Path(path)
    try:
        raw_payload = config_path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ValueError(f"Experiment config file not found at {config_path!s}.") from exc
    if not raw_payload.strip():
        logging.warning("Experiment config file %s is empty; using defaults.", config_path)
        return {}
    try:
        data = json.loads(raw_payload)
    except json.JSONDecodeError as exc:
        raise ValueError(f"Experiment config file {config_path!s} is not valid JSON.") from exc
    if not isinstance(data, dict):
        raise ValueError(f"Experiment config file {config_path!s} must hold a JSON object.")
    return data


def _default_workers() -> Optional[int]:
    raw_value = os.environ.get(WORKERS_ENV)
    if not raw_value:
        return None
    try:
        return int(raw_value)
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV}={raw_value!r} is not an integer") from exc


def build_config(
    config_path: str | Path | None = None,
    overrides: Optional[dict[str, Any]] = None,
) -> ExperimentConfig:
    """Defaults, then the JSON file, then CLI overrides (``None`` values ignored)."""
    data: dict[str, Any] = {}
    if config_path is not None:
        data.update(load_config_file(config_path))
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    if "workers" not in data:
        env_workers = _default_workers()
        if env_workers is not None:
            data["workers"] = env_workers
    return config_from_dict(data)


class ExperimentRunner:
    """Runs one configured experiment and writes its files."""

    def __init__(self, config: ExperimentConfig) -> None:
        self._config = config

    @property
    def config(self) -> ExperimentConfig:
        return self._config

    @contextmanager
    def _mapper(self) -> Iterator[Mapper]:
        workers = self._config.workers
        if workers == 1:
            yield map
            return
        chunksize = max(1, self._config.samples // (workers * _CHUNKS_PER_WORKER))
        with multiprocessing.Pool(workers) as pool:

            def ordered_map(func: Any, items: Any) -> Iterator[Any]:
                return pool.imap(func, items, chunksize=chunksize)

            yield ordered_map

    def execute(self) -> ExperimentResult:
        experiment = EXPERIMENTS[self._config.experiment]
        logging.info(
            "Running %s: samples=%d seed=%d workers=%d",
            self._config.experiment,
            self._config.samples,
            self._config.seed,
            self._config.workers,
        )
        with self._mapper() as mapper:
            return experiment(self._config, mapper)

    def run(self) -> list[Path]:
        started = time.perf_counter()
        result = self.execute()
        wall_time = time.perf_counter() - started
        paths = emit(result.records, self._config, result.summary, wall_time)
        logging.info(
            "Wrote %d records to %s (%.1f s).",
            len(result.records),
            paths[0],
            wall_time,
        )
        return paths
