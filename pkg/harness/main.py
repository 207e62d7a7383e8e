"""Entry point for the DQC1 experiment harness."""

from __future__ import annotations

import argparse
import logging
import os
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from dqc1 import __version__
from dqc1.circuit import FilterAnnihilationError
from dqc1.purifier import OptimizationError
from harness.core import ExperimentRunner, build_config
from harness.validate import run_validate
from shared_lib.parsing import parse_float_list
from shared_lib.schema import EXPERIMENT_NAMES

LOG_LEVEL_ENV = "DQC1_LOG_LEVEL"
EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
# Only 0, 2 and 3 are used; a run that aborts shares 2 with invalid input.
EXIT_FAILED = EXIT_INVALID


def _configure_logging(verbose: bool = False) -> None:
    level_name = "DEBUG" if verbose else os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(message)s",
    )


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file mirroring ExperimentConfig")
    parser.add_argument("--samples", type=int, help="samples per eta (or per epsilon)")
    parser.add_argument("--eta", help="comma-separated eta grid, e.g. 0,0.5,1")
    parser.add_argument("--epsilon", help="comma-separated NMR polarizations")
    parser.add_argument("--seed", help="64-bit seed, decimal or 0x-hex")
    parser.add_argument(
        "--control-sampler",
        help="pure | hs | alpha=<value in [0, 1]>",
    )
    parser.add_argument("--workers", type=int, help="worker processes (default: $DQC1_WORKERS or 1)")
    parser.add_argument("--out", dest="output_path", help="output file path")
    parser.add_argument("--format", dest="output_format", choices=("csv", "json"))
    parser.add_argument("--target-purity", type=float, help="purification stopping purity")
    parser.add_argument("--max-steps", type=int, help="purification step limit")
    parser.add_argument("--min-step-eta", type=float, help="smallest filter eta per purification step")
    parser.add_argument("--bins", type=int, help="purity bins for correlations-vs-purity")
    parser.add_argument("--histogram-bins", type=int, help="bins for fidelity histograms")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqc1",
        description="Correlations and post-selected purification in the two-qubit DQC1 circuit.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENT_NAMES:
        _add_experiment_flags(subparsers.add_parser(name, help=f"run the {name} experiment"))
    validate = subparsers.add_parser("validate", help="run the invariant suite")
    validate.add_argument("--full", action="store_true", help="use acceptance-scale sample counts")
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {
        "experiment": args.command,
        "samples": args.samples,
        "seed": args.seed,
        "control_sampler": args.control_sampler,
        "workers": args.workers,
        "output_path": args.output_path,
        "output_format": args.output_format,
        "target_purity": args.target_purity,
        "max_steps": args.max_steps,
        "min_step_eta": args.min_step_eta,
        "bins": args.bins,
        "histogram_bins": args.histogram_bins,
    }
    if args.eta is not None:
        overrides["eta_values"] = parse_float_list(args.eta)
    if args.epsilon is not None:
        overrides["epsilon_values"] = parse_float_list(args.epsilon)
    return overrides


def _run_validate(full: bool) -> int:
    passed, failed = run_validate(full=full)
    logging.info("Validation finished: %d passed, %d failed.", passed, failed)
    return EXIT_OK if failed == 0 else EXIT_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    if args.command == "validate":
        return _run_validate(args.full)
    try:
        config = build_config(args.config, overrides_from_args(args))
    except (ValueError, ValidationError) as exc:
        logging.error("Invalid configuration: %s", exc)
        return EXIT_INVALID
    try:
        ExperimentRunner(config).run()
    except OSError as exc:
        logging.error("I/O failure: %s", exc)
        return EXIT_IO
    except (FilterAnnihilationError, OptimizationError) as exc:
        logging.error("Experiment %s aborted: %s", config.experiment, exc)
        return EXIT_FAILED
    except Exception:
        logging.exception("Experiment %s failed.", config.experiment)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
