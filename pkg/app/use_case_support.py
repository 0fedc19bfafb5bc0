from __future__ import annotations

import re
from collections.abc import Callable, Mapping, Sequence
from pathlib import Path
from typing import NamedTuple

from config import (
    DEFAULT_BURN_IN,
    DEFAULT_FORGETTING,
    DEFAULT_GRID_MIN_RATIO,
    DEFAULT_GRID_SIZE,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    DEFAULT_WINDOW,
)
from domain.errors import ConfigError
from domain.policies import StreamMethod, WindowWeighting
from domain.scenarios import ScenarioSpec
from infrastructure.result_store import ResultStore
from services.config_parser import STREAM_KEYS, parse_flag, parse_int
from utils.excel_utils import export_tables_to_xlsx
from utils.manifest_utils import MANIFEST_NAME, build_manifest, write_manifest

XLSX_NAME = "results.xlsx"

STREAM_DEFAULTS: dict[str, str] = {
    "method": StreamMethod.BIC_WINDOW.value,
    "window": str(DEFAULT_WINDOW),
    "burn_in": str(DEFAULT_BURN_IN),
    "weighting": WindowWeighting.RECTANGULAR.value,
    "window_forgetting": str(DEFAULT_FORGETTING),
    "grid_size": str(DEFAULT_GRID_SIZE),
    "grid_min_ratio": str(DEFAULT_GRID_MIN_RATIO),
    "forgetting": str(DEFAULT_FORGETTING),
    "log_space": "false",
    "tol": str(DEFAULT_TOL),
    "max_iter": str(DEFAULT_MAX_ITER),
}

Writer = Callable[[Path], None]
XlsxTables = Mapping[str, tuple[Sequence[str], Sequence[Mapping[str, object]]]]


class RunOutcome(NamedTuple):
    out_dir: Path
    files: tuple[str, ...]
    summary: str
    manifest: dict


def resolved_config(
    config: Mapping[str, str],
    *,
    spec: ScenarioSpec | None = None,
    extra_keys: Sequence[str] = (),
    extra_defaults: Mapping[str, str] | None = None,
) -> dict[str, str]:
    """Flat config with every value the run used, suitable for replay."""
    resolved = dict(STREAM_DEFAULTS)
    resolved.update({key: config[key] for key in STREAM_KEYS if config.get(key)})
    resolved.update(extra_defaults or {})
    resolved.update({key: config[key] for key in extra_keys if config.get(key)})
    if spec is not None:
        resolved.update(spec.to_config())
    return resolved


def config_count(config: Mapping[str, str], key: str, default: int, *, minimum: int) -> int:
    value = parse_int(config.get(key) or str(default), key)
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value


def config_workers(config: Mapping[str, str]) -> int | None:
    raw = config.get("threads")
    if not raw:
        return None
    return config_count(config, "threads", 0, minimum=0)


def wants_xlsx(config: Mapping[str, str]) -> bool:
    return parse_flag(config.get("xlsx") or "false", "xlsx")


def safe_file_stem(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label).strip("._") or "node"


def node_file_names(labels: Sequence[str]) -> list[str]:
    """``node_<label>.csv`` per label, de-duplicated after sanitizing."""
    names: list[str] = []
    used: set[str] = set()
    for label in labels:
        stem = f"node_{safe_file_stem(label)}"
        name = f"{stem}.csv"
        counter = 2
        while name in used:
            name = f"{stem}_{counter}.csv"
            counter += 1
        used.add(name)
        names.append(name)
    return names


def write_outputs(
    store: ResultStore,
    *,
    command: str,
    config: Mapping[str, str],
    seeds: Sequence[int],
    writers: Mapping[str, Writer],
    xlsx_tables: XlsxTables | None = None,
) -> tuple[tuple[str, ...], dict]:
    """Write every output plus the manifest into staging, then commit them together."""
    with store.staging() as staging:
        for name, writer in writers.items():
            writer(staging / name)
        files = list(writers)
        if xlsx_tables is not None:
            export_tables_to_xlsx(xlsx_tables, str(staging / XLSX_NAME))
            files.append(XLSX_NAME)
        manifest = build_manifest(
            command=command, config=config, seeds=seeds, directory=staging, files=files
        )
        write_manifest(manifest, staging)
    return tuple(sorted(files)) + (MANIFEST_NAME,), manifest
