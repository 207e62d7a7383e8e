"""Result records and their CSV / JSON / sidecar files."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional

from dqc1 import __version__
from shared_lib.schema import ExperimentConfig, config_to_dict


@dataclass
class SampleRecord:
    sample_index: int
    eta: Optional[float] = None
    epsilon: Optional[float] = None
    step_index: Optional[int] = None
    bell: Optional[float] = None
    negativity: Optional[float] = None
    discord: Optional[float] = None
    coherence: Optional[float] = None
    control_coherence: Optional[float] = None
    purity_aux: Optional[float] = None
    success_probability: Optional[float] = None
    fidelity: Optional[float] = None
    filter_eta: Optional[float] = None
    filter_theta: Optional[float] = None
    filter_phi: Optional[float] = None


FIELD_NAMES: tuple[str, ...] = tuple(item.name for item in fields(SampleRecord))
_INT_FIELDS = {"sample_index", "step_index"}


def record_sort_key(record: SampleRecord) -> tuple[float, float, int, int]:
    return (
        -1.0 if record.eta is None else record.eta,
        -1.0 if record.epsilon is None else record.epsilon,
        record.sample_index,
        -1 if record.step_index is None else record.step_index,
    )


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(name: str, raw_value: str) -> Any:
    if raw_value == "":
        return None
    if name in _INT_FIELDS:
        return int(raw_value)
    return float(raw_value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return value


def records_to_csv(records: Iterable[SampleRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=FIELD_NAMES, lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow({name: _format_value(getattr(record, name)) for name in FIELD_NAMES})
    return buffer.getvalue()


def records_from_csv(text: str) -> list[SampleRecord]:
    reader = csv.DictReader(io.StringIO(text))
    return [
        SampleRecord(**{name: _parse_value(name, row[name]) for name in FIELD_NAMES})
        for row in reader
    ]


def records_to_json(
    records: Iterable[SampleRecord],
    config: ExperimentConfig,
    summary: dict[str, Any],
) -> str:
    payload = {
        "config": config_to_dict(config),
        "records": [asdict(record) for record in records],
        "summary": _jsonable(summary),
    }
    return json.dumps(payload, indent=2)


def records_from_json(text: str) -> list[SampleRecord]:
    payload = json.loads(text)
    return [SampleRecord(**row) for row in payload["records"]]


def read_records(path: str | Path) -> list[SampleRecord]:
    target = Path(path)
    text = target.read_text(encoding="utf-8")
    if target.suffix.lower() == ".json":
        return records_from_json(text)
    return records_from_csv(text)


def metadata_path(output_path: str | Path) -> Path:
    target = Path(output_path)
    return target.with_name(target.name + ".meta.json")


def _write_atomic(path: Path, payload: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        "w",
        encoding="utf-8",
        dir=path.parent,
        delete=False,
    ) as handle:
        handle.write(payload)
        temp_name = handle.name
    try:
        os.replace(temp_name, path)
    except OSError:
        os.unlink(temp_name)
        raise


def emit(
    records: list[SampleRecord],
    config: ExperimentConfig,
    summary: dict[str, Any],
    wall_time: float,
) -> list[Path]:
    """Write the record file and its metadata sidecar; returns both paths."""
    output = Path(config.output_path)
    ordered = sorted(records, key=record_sort_key)
    if config.output_format == "json":
        payload = records_to_json(ordered, config, summary)
    else:
        payload = records_to_csv(ordered)
    _write_atomic(output, payload)
    sidecar = metadata_path(output)
    metadata = {
        "seed": config.seed,
        "config": config_to_dict(config),
        "tool_version": __version__,
        "wall_time_seconds": wall_time,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "record_count": len(ordered),
        "summary": _jsonable(summary),
    }
    _write_atomic(sidecar, json.dumps(metadata, indent=2))
    return [output, sidecar]
