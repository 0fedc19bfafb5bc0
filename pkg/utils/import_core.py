import math
from typing import Any

MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none"})


def norm_key(value: str) -> str:
    return value.strip().lower().replace(" ", "_").replace("-", "_")


def is_missing(value: Any) -> bool:
    if value is None:
        return True
    return str(value).strip().lower() in MISSING_TOKENS


def as_float(value: Any, default: float | None = None) -> float | None:
    """Finite float from a cell, ``default`` when it does not parse."""
    try:
        parsed = float(str(value).strip())
        if not math.isfinite(parsed):
            return default
        return parsed
    except (TypeError, ValueError):
        return default


def parse_strict_int(raw_value: Any) -> int | None:
    parsed = as_float(raw_value, None)
    if parsed is None:
        return None
    try:
        integer = int(parsed)
    except (TypeError, ValueError, OverflowError):
        return None
    if abs(parsed - integer) > 1e-9:
        return None
    return integer


def parse_bool(raw_value: Any) -> bool | None:
    normalized = norm_key(str(raw_value))
    if normalized in {"1", "true", "yes", "on"}:
        return True
    if normalized in {"0", "false", "no", "off"}:
        return False
    return None
