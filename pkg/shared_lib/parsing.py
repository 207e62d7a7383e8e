"""Parsers for CLI and config-file values."""

from __future__ import annotations

from typing import Optional, Union

SEED_LIMIT = 2**64

_SAMPLER_ALIASES = {
    "pure": "pure-haar",
    "pure-haar": "pure-haar",
    "haar": "pure-haar",
    "hs": "mixed-hs",
    "mixed": "mixed-hs",
    "mixed-hs": "mixed-hs",
}


def parse_seed(raw_value: Union[str, int]) -> int:
    """Decimal or 0x-hex 64-bit unsigned seed."""
    if isinstance(raw_value, bool):
        raise ValueError("seed must be an integer")
    if isinstance(raw_value, int):
        value = raw_value
    else:
        text = str(raw_value).strip().lower()
        try:
            value = int(text, 16) if text.startswith("0x") else int(text, 10)
        except ValueError as exc:
            raise ValueError(f"seed {raw_value!r} is not a decimal or 0x-hex integer") from exc
    if not 0 <= value < SEED_LIMIT:
        raise ValueError(f"seed {value} outside the 64-bit unsigned range")
    return value


def parse_float_list(raw_value: Optional[str]) -> list[float]:
    if not raw_value:
        return []
    values: list[float] = []
    for item in raw_value.split(","):
        if not item.strip():
            continue
        try:
            values.append(float(item))
        except ValueError as exc:
            raise ValueError(f"{item.strip()!r} is not a number") from exc
    return values


def parse_control_sampler(raw_value: str) -> tuple[str, Optional[float]]:
    """Return (kind, alpha) for ``pure-haar``, ``mixed-hs`` or ``alpha=<value>``."""
    text = raw_value.strip().lower()
    if text.startswith("alpha"):
        _, _, number = text.partition("=")
        try:
            alpha = float(number)
        except ValueError as exc:
            raise ValueError(f"control sampler {raw_value!r} needs alpha=<value>") from exc
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        return "alpha", alpha
    if text not in _SAMPLER_ALIASES:
        raise ValueError(
            f"unknown control sampler {raw_value!r}; use pure, hs or alpha=<value>"
        )
    return _SAMPLER_ALIASES[text], None


def format_control_sampler(kind: str, alpha: Optional[float]) -> str:
    if kind == "alpha":
        return f"alpha={alpha!r}"
    return kind
