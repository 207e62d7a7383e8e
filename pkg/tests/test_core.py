import json

import pytest

from harness.core import WORKERS_ENV, ExperimentRunner, build_config, load_config_file
from harness.emitter import metadata_path, read_records
from dqc1.circuit import FilterAnnihilationError
from dqc1.purifier import OptimizationError
from harness.main import EXIT_FAILED, EXIT_INVALID, EXIT_IO, EXIT_OK, main


def write_config(tmp_path, payload):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(payload))
    return path


def test_load_config_file_errors(tmp_path):
    with pytest.raises(ValueError, match="not found"):
        load_config_file(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ValueError, match="not valid JSON"):
        load_config_file(broken)
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]")
    with pytest.raises(ValueError, match="JSON object"):
        load_config_file(listing)


def test_empty_config_file_means_defaults(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("   ")
    assert load_config_file(empty) == {}


def test_flags_override_file_values(tmp_path, monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    path = write_config(tmp_path, {"experiment": "purity-vs-eta", "samples": 30, "seed": 4})
    cfg = build_config(path, {"samples": 12, "seed": None})
    assert cfg.samples == 12
    assert cfg.seed == 4
    assert cfg.workers == 1


def test_workers_environment_default(tmp_path, monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert build_config(overrides={"experiment": "purification"}).workers == 3
    assert build_config(overrides={"experiment": "purification", "workers": 2}).workers == 2
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ValueError, match=WORKERS_ENV):
        build_config(overrides={"experiment": "purification"})


def test_runner_writes_output_and_sidecar(tmp_path):
    out = tmp_path / "scatter.csv"
    cfg = build_config(
        overrides={"experiment": "standard-scatter", "samples": 10, "output_path": str(out), "workers": 1}
    )
    paths = ExperimentRunner(cfg).run()
    assert paths == [out, metadata_path(out)]
    assert len(read_records(out)) == 10
    assert json.loads(paths[1].read_text())["config"]["experiment"] == "standard-scatter"


def test_results_do_not_depend_on_worker_count(tmp_path):
    outputs = []
    for workers in (1, 2):
        out = tmp_path / f"fidelity-{workers}.csv"
        cfg = build_config(
            overrides={
                "experiment": "fidelity-benchmark",
                "samples": 12,
                "eta_values": [0.0, 0.5],
                "seed": "0xBEEF",
                "workers": workers,
                "output_path": str(out),
            }
        )
        ExperimentRunner(cfg).run()
        outputs.append(out.read_text())
    assert outputs[0] == outputs[1]


def test_main_runs_an_experiment(tmp_path, monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    out = tmp_path / "nmr.json"
    code = main(
        ["nmr-fidelity", "--samples", "5", "--epsilon", "0.2,0.8", "--seed", "9", "--out", str(out), "--format", "json"]
    )
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert len(payload["records"]) == 10
    assert payload["config"]["epsilon_values"] == [0.2, 0.8]


@pytest.mark.parametrize(
    "argv",
    [
        ["purity-vs-eta", "--samples", "0"],
        ["purity-vs-eta", "--eta", "0.5,2"],
        ["purity-vs-eta", "--eta", ""],
        ["nmr-fidelity", "--epsilon", ","],
        ["purification", "--min-step-eta", "1"],
        ["purity-vs-eta", "--seed", "-5"],
        ["purity-vs-eta", "--control-sampler", "thermal"],
    ],
)
def test_main_rejects_invalid_config(argv, tmp_path):
    assert main([*argv, "--out", str(tmp_path / "x.csv")]) == EXIT_INVALID
    assert not (tmp_path / "x.csv").exists()


def test_main_rejects_missing_config_file(tmp_path):
    assert main(["purification", "--config", str(tmp_path / "nope.json")]) == EXIT_INVALID


def test_main_reports_io_failure(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    argv = ["standard-scatter", "--samples", "2", "--workers", "1", "--out", str(blocker / "out.csv")]
    assert main(argv) == EXIT_IO


@pytest.mark.parametrize(
    "error",
    [
        OptimizationError("no feasible filter"),
        FilterAnnihilationError("zero success probability"),
        RuntimeError("boom"),
    ],
)
def test_main_maps_run_failures_to_documented_code(error, tmp_path, monkeypatch):
    def failing(self):
        raise error

    monkeypatch.setattr(ExperimentRunner, "run", failing)
    assert main(["purification", "--samples", "1", "--out", str(tmp_path / "x.csv")]) == EXIT_FAILED
    assert EXIT_FAILED in (EXIT_OK, EXIT_INVALID, EXIT_IO)


def test_main_validate_failure_uses_documented_code(monkeypatch):
    monkeypatch.setattr("harness.main.run_validate", lambda full: (3, 1))
    assert main(["validate"]) == EXIT_FAILED
    monkeypatch.setattr("harness.main.run_validate", lambda full: (4, 0))
    assert main(["validate"]) == EXIT_OK
