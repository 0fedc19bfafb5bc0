"""Flat ``key = value`` run configuration: reading, normalizing, typed access."""

from __future__ import annotations

import json
from collections.abc import Mapping
from enum import StrEnum
from pathlib import Path
from typing import Any, TypeVar

from config import (
    DEFAULT_BURN_IN,
    DEFAULT_FORGETTING,
    DEFAULT_GRID_MIN_RATIO,
    DEFAULT_GRID_SIZE,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    DEFAULT_WINDOW,
)
from domain.errors import ConfigError, InvalidInputError
from domain.grids import LambdaGrid
from domain.policies import StreamMethod, WindowWeighting
from domain.rap_state import RapConfig
from domain.stream_config import StreamConfig
from utils.import_core import as_float, norm_key, parse_bool, parse_strict_int

MAX_CONFIG_FILE_SIZE = 1024 * 1024  # 1 MB

SCENARIO_KEYS = (
    "n",
    "p",
    "change_point",
    "sigma1",
    "sigma2",
    "rho1",
    "rho2",
    "q1",
    "q2",
    "beta1",
    "beta2",
    "seed",
)
STREAM_KEYS = (
    "method",
    "window",
    "burn_in",
    "weighting",
    "window_forgetting",
    "grid_size",
    "grid_min_ratio",
    "forgetting",
    "step_size",
    "lambda_floor",
    "log_space",
    "tol",
    "max_iter",
)
RUN_KEYS = ("replicates", "threads", "settle", "xlsx")
SWEEP_KEYS = ("axis", "values", "axis2", "values2")
DATA_KEYS = ("data", "delimiter", "header", "missing", "time_column", "log_returns")

KNOWN_KEYS = frozenset(SCENARIO_KEYS + STREAM_KEYS + RUN_KEYS + SWEEP_KEYS + DATA_KEYS)

E = TypeVar("E", bound=StrEnum)


def _as_text(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list | tuple):
        return ",".join(_as_text(item) for item in value)
    if value is None:
        return ""
    return str(value)


def normalize_config(mapping: Mapping[str, Any], *, source: str = "<config>") -> dict[str, str]:
    normalized: dict[str, str] = {}
    for raw_key, raw_value in mapping.items():
        key = norm_key(str(raw_key))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}: unknown key '{raw_key}'")
        if key in normalized:
            raise ConfigError(f"{source}: duplicate key '{key}'")
        normalized[key] = _as_text(raw_value).strip()
    return normalized


def parse_config_text(text: str, *, source: str = "<config>") -> dict[str, str]:
    """``key = value`` per line; blank lines and lines starting with ``#`` are skipped."""
    entries: dict[str, str] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{source}: line {line_number}: expected 'key = value'")
        key = norm_key(key)
        if key in entries:
            raise ConfigError(f"{source}: line {line_number}: duplicate key '{key}'")
        entries[key] = value.strip()
    return normalize_config(entries, source=source)


def read_config_file(path: str | Path) -> dict[str, str]:
    """Read a key = value file, or a JSON manifest whose ``config`` object is the mapping."""
    source = Path(path)
    if not source.exists():
        raise ConfigError(f"Config file not found: {path}")
    if source.stat().st_size > MAX_CONFIG_FILE_SIZE:
        raise ConfigError(f"Config file is too large: {source.stat().st_size} bytes")
    text = source.read_text(encoding="utf-8")
    if source.suffix.lower() != ".json":
        return parse_config_text(text, source=str(path))
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from exc
    if isinstance(payload, dict) and isinstance(payload.get("config"), dict):
        payload = payload["config"]
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: JSON config must be an object")
    return normalize_config(payload, source=str(path))


def merge_config(base: Mapping[str, str], overrides: Mapping[str, Any]) -> dict[str, str]:
    """Overrides win; ``None`` means "not given"."""
    merged = dict(base)
    given = {key: value for key, value in overrides.items() if value is not None}
    merged.update(normalize_config(given, source="<command line>"))
    return merged


def parse_int(raw: str, key: str) -> int:
    value = parse_strict_int(raw)
    if value is None:
        raise ConfigError(f"{key}: expected an integer, got '{raw}'")
    return value


def parse_float(raw: str, key: str) -> float:
    value = as_float(raw, None)
    if value is None:
        raise ConfigError(f"{key}: expected a finite number, got '{raw}'")
    return value


def parse_float_list(raw: str, key: str) -> list[float]:
    items = [item.strip() for item in str(raw).split(",") if item.strip()]
    if not items:
        raise ConfigError(f"{key}: expected a comma-separated list of numbers")
    return [parse_float(item, key) for item in items]


def parse_flag(raw: str, key: str) -> bool:
    value = parse_bool(raw)
    if value is None:
        raise ConfigError(f"{key}: expected true/false, got '{raw}'")
    return value


def parse_choice(raw: str, key: str, choices: type[E]) -> E:
    try:
        return choices(norm_key(raw))
    except ValueError as exc:
        allowed = ", ".join(member.value for member in choices)
        raise ConfigError(f"{key}: expected one of {allowed}, got '{raw}'") from exc


def _optional(config: Mapping[str, str], key: str) -> str | None:
    raw = config.get(key)
    return raw if raw not in (None, "") else None


def build_stream_config(config: Mapping[str, str]) -> StreamConfig:
    def value(key: str, default: object) -> str:
        return config.get(key, str(default))

    try:
        step = _optional(config, "step_size")
        floor = _optional(config, "lambda_floor")
        rap = RapConfig(
            forgetting=parse_float(value("forgetting", DEFAULT_FORGETTING), "forgetting"),
            step_size=parse_float(step, "step_size") if step is not None else None,
            lambda_floor=parse_float(floor, "lambda_floor") if floor is not None else None,
            log_space=parse_flag(value("log_space", "false"), "log_space"),
        )
        grid = LambdaGrid.relative(
            parse_int(value("grid_size", DEFAULT_GRID_SIZE), "grid_size"),
            parse_float(value("grid_min_ratio", DEFAULT_GRID_MIN_RATIO), "grid_min_ratio"),
        )
        return StreamConfig(
            method=parse_choice(value("method", StreamMethod.BIC_WINDOW), "method", StreamMethod),
            window_length=parse_int(value("window", DEFAULT_WINDOW), "window"),
            burn_in=parse_int(value("burn_in", DEFAULT_BURN_IN), "burn_in"),
            grid=grid,
            rap=rap,
            tol=parse_float(value("tol", DEFAULT_TOL), "tol"),
            max_iter=parse_int(value("max_iter", DEFAULT_MAX_ITER), "max_iter"),
            weighting=parse_choice(
                value("weighting", WindowWeighting.RECTANGULAR), "weighting", WindowWeighting
            ),
            window_forgetting=parse_float(
                value("window_forgetting", DEFAULT_FORGETTING), "window_forgetting"
            ),
        )
    except InvalidInputError as exc:
        raise ConfigError(f"invalid stream settings: {exc}") from exc
