"""Experiment configuration schema."""

from typing import Any, List, Literal, Optional

from pydantic import BaseModel

from shared_lib.parsing import format_control_sampler, parse_control_sampler, parse_seed

try:
    from pydantic import ConfigDict, field_validator
except ImportError:  # pragma: no cover - Pydantic v1 fallback
    ConfigDict = None  # type: ignore[assignment]
    from pydantic import validator  # type: ignore[no-redef]
    field_validator = None  # type: ignore[assignment]

ExperimentName = Literal[
    "standard-scatter",
    "fidelity-benchmark",
    "purity-vs-eta",
    "correlations-vs-purity",
    "density-of-states",
    "purification",
    "nmr-fidelity",
]
OutputFormat = Literal["csv", "json"]

EXPERIMENT_NAMES: tuple[str, ...] = ExperimentName.__args__  # type: ignore[attr-defined]
DEFAULT_ETA_VALUES = [0.0, 0.25, 0.5, 0.75, 1.0]
DEFAULT_EPSILON_VALUES = [0.1, 0.25, 0.5, 0.75, 1.0]
DEFAULT_SAMPLES = 10_000
DEFAULT_MIN_STEP_ETA = 0.65
# Experiments whose reference maxima come from mixed Hilbert-Schmidt controls.
MIXED_CONTROL_EXPERIMENTS = ("standard-scatter", "density-of-states")


def _check_unit_interval(values: List[float], name: str) -> List[float]:
    if not values:
        raise ValueError(f"{name} must list at least one value")
    for value in values:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} value {value} outside [0, 1]")
    return values


def _check_positive(value: int, name: str) -> int:
    if value < 1:
        raise ValueError(f"{name} must be at least 1, got {value}")
    return value


def _check_eta_floor(value: float) -> float:
    if not 0.0 <= value < 1.0:
        raise ValueError(f"min_step_eta must lie in [0, 1), got {value}")
    return value


def _canonical_sampler(value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    kind, alpha = parse_control_sampler(value)
    return format_control_sampler(kind, alpha)


class ExperimentConfig(BaseModel):
    experiment: ExperimentName
    samples: int = DEFAULT_SAMPLES
    eta_values: List[float] = DEFAULT_ETA_VALUES
    epsilon_values: List[float] = DEFAULT_EPSILON_VALUES
    seed: int = 0
    control_sampler: Optional[str] = None
    workers: int = 1
    output_path: str = "results.csv"
    output_format: OutputFormat = "csv"
    target_purity: float = 0.99
    max_steps: int = 50
    min_step_eta: float = DEFAULT_MIN_STEP_ETA
    bins: int = 25
    histogram_bins: int = 50

    def sampler(self) -> tuple[str, Optional[float]]:
        """Control-state sampler; mixed HS for the studies compared with the unfiltered maxima."""
        if self.control_sampler is not None:
            return parse_control_sampler(self.control_sampler)
        if self.experiment in MIXED_CONTROL_EXPERIMENTS:
            return "mixed-hs", None
        return "pure-haar", None

    if field_validator is not None:

        @field_validator("seed", mode="before")
        @classmethod
        def _validate_seed(cls, value: Any) -> int:
            return parse_seed(value)

        @field_validator("eta_values", "epsilon_values")
        @classmethod
        def _validate_unit_values(cls, value: List[float], info: Any) -> List[float]:
            return _check_unit_interval(value, info.field_name)

        @field_validator("samples", "workers", "max_steps", "bins", "histogram_bins")
        @classmethod
        def _validate_counts(cls, value: int, info: Any) -> int:
            return _check_positive(value, info.field_name)

        @field_validator("control_sampler")
        @classmethod
        def _validate_sampler(cls, value: Optional[str]) -> Optional[str]:
            return _canonical_sampler(value)

        @field_validator("target_purity")
        @classmethod
        def _validate_target(cls, value: float) -> float:
            if not 0.5 < value < 1.0:
                raise ValueError(f"target_purity must lie in (0.5, 1), got {value}")
            return value

        @field_validator("min_step_eta")
        @classmethod
        def _validate_min_step_eta(cls, value: float) -> float:
            return _check_eta_floor(value)

    else:

        @validator("seed", pre=True)
        def _validate_seed(cls, value: Any) -> int:  # type: ignore[no-redef]
            return parse_seed(value)

        @validator("eta_values", "epsilon_values")
        def _validate_unit_values(  # type: ignore[no-redef]
            cls,
            value: List[float],
            field: Any,
        ) -> List[float]:
            return _check_unit_interval(value, field.name)

        @validator("samples", "workers", "max_steps", "bins", "histogram_bins")
        def _validate_counts(cls, value: int, field: Any) -> int:  # type: ignore[no-redef]
            return _check_positive(value, field.name)

        @validator("control_sampler")
        def _validate_sampler(  # type: ignore[no-redef]
            cls,
            value: Optional[str],
        ) -> Optional[str]:
            return _canonical_sampler(value)

        @validator("target_purity")
        def _validate_target(cls, value: float) -> float:  # type: ignore[no-redef]
            if not 0.5 < value < 1.0:
                raise ValueError(f"target_purity must lie in (0.5, 1), got {value}")
            return value

        @validator("min_step_eta")
        def _validate_min_step_eta(cls, value: float) -> float:  # type: ignore[no-redef]
            return _check_eta_floor(value)

    if ConfigDict is not None:
        model_config = ConfigDict(extra="forbid")
    else:
        class Config:
            extra = "forbid"


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    if hasattr(ExperimentConfig, "model_validate"):
        return ExperimentConfig.model_validate(data)
    return ExperimentConfig.parse_obj(data)


def config_to_dict(config: ExperimentConfig) -> dict[str, Any]:
    if hasattr(config, "model_dump"):
        return config.model_dump(mode="json")
    return config.dict()
