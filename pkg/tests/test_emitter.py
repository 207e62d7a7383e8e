import json

import pytest

from harness.emitter import (
    FIELD_NAMES,
    SampleRecord,
    emit,
    metadata_path,
    read_records,
    records_from_csv,
    records_from_json,
    records_to_csv,
    records_to_json,
)
from shared_lib.schema import config_from_dict


def sample_records():
    return [
        SampleRecord(sample_index=1, eta=0.5, bell=2.0000000000000004, purity_aux=0.1 + 0.2),
        SampleRecord(sample_index=0, eta=0.5, fidelity=0.9999999999999999),
        SampleRecord(sample_index=0, step_index=2, negativity=1e-17, filter_phi=6.283185307179586),
    ]


def make_config(tmp_path, **extra):
    return config_from_dict(
        {"experiment": "standard-scatter", "output_path": str(tmp_path / "out.csv"), **extra}
    )


def test_csv_header_names_every_field():
    header = records_to_csv([]).splitlines()
    assert header == [",".join(FIELD_NAMES)]


def test_csv_round_trip_is_exact():
    records = sample_records()
    assert records_from_csv(records_to_csv(records)) == records


def test_json_round_trip_is_exact(tmp_path):
    records = sample_records()
    text = records_to_json(records, make_config(tmp_path), {"note": "x"})
    assert records_from_json(text) == records
    payload = json.loads(text)
    assert set(payload) == {"config", "records", "summary"}


def test_json_with_no_records(tmp_path):
    payload = json.loads(records_to_json([], make_config(tmp_path), {}))
    assert payload["records"] == []


def test_emit_writes_sorted_records_and_sidecar(tmp_path):
    cfg = make_config(tmp_path, seed=99)
    output, sidecar = emit(sample_records(), cfg, {"max_bell": 2.0, "empty": float("nan")}, 1.5)
    assert output == tmp_path / "out.csv"
    assert sidecar == metadata_path(output)
    written = read_records(output)
    assert [(r.eta, r.sample_index, r.step_index) for r in written] == [
        (None, 0, 2),
        (0.5, 0, None),
        (0.5, 1, None),
    ]
    metadata = json.loads(sidecar.read_text())
    assert metadata["seed"] == 99
    assert metadata["record_count"] == 3
    assert metadata["wall_time_seconds"] == 1.5
    assert metadata["summary"]["empty"] is None
    assert "tool_version" in metadata


def test_emit_json_format(tmp_path):
    cfg = make_config(tmp_path, output_path=str(tmp_path / "nested" / "out.json"), output_format="json")
    output, _ = emit(sample_records(), cfg, {}, 0.0)
    assert sorted(read_records(output), key=lambda r: (r.sample_index, r.step_index or 0)) == sorted(
        sample_records(), key=lambda r: (r.sample_index, r.step_index or 0)
    )


def test_emit_to_unwritable_path_raises_os_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    cfg = make_config(tmp_path, output_path=str(blocker / "out.csv"))
    with pytest.raises(OSError):
        emit([], cfg, {}, 0.0)
