"""Delimited-text ingestion of multivariate series and the node-wise regression pipeline."""

from __future__ import annotations

import csv
import errno
import logging
from pathlib import Path
from typing import NamedTuple

import numpy as np

from domain.errors import DataFormatError, DomainError, InvalidInputError, NodeError
from domain.policies import MissingValuePolicy
from domain.series import MultivariateSeries
from domain.stream_config import StreamConfig
from domain.traces import LambdaTrace
from utils.import_core import as_float, is_missing, parse_strict_int

from .harness import average_traces, normalize_unit_interval, run_stream
from .parallel import run_tasks

logger = logging.getLogger(__name__)

MAX_DATA_FILE_SIZE = 100 * 1024 * 1024  # 100 MB
MAX_DATA_ROWS = 1_000_000
MAX_CSV_FIELD_SIZE = 1_000_000


class NodewiseResult(NamedTuple):
    labels: tuple[str, ...]
    per_node: tuple[LambdaTrace, ...]
    averaged_normalized: LambdaTrace


def _resolve_time_column(time_column: str | int | None, labels: list[str]) -> int | None:
    if time_column is None or time_column == "":
        return None
    if isinstance(time_column, int):
        index = time_column
    elif str(time_column) in labels:
        return labels.index(str(time_column))
    else:
        parsed = parse_strict_int(time_column)
        if parsed is None:
            raise DataFormatError(f"time column '{time_column}' not found", column=str(time_column))
        index = parsed
    if not 0 <= index < len(labels):
        raise DataFormatError(f"time column index {index} is out of range", column=str(time_column))
    return index


def _read_rows(source: Path, delimiter: str) -> list[tuple[int, list[str]]]:
    """Rows with their 1-based line numbers; empty lines are skipped, blank cells are kept."""
    csv.field_size_limit(MAX_CSV_FIELD_SIZE)
    rows: list[tuple[int, list[str]]] = []
    with open(source, newline="", encoding="utf-8-sig") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(rows) > MAX_DATA_ROWS:
                raise DataFormatError(f"file exceeded row limit ({MAX_DATA_ROWS})")
            rows.append((reader.line_num, row))
    return rows


def load_csv(
    path: str | Path,
    *,
    delimiter: str = ",",
    header: bool = True,
    missing: MissingValuePolicy | str = MissingValuePolicy.STRICT,
    time_column: str | int | None = None,
    log_returns: bool = False,
) -> MultivariateSeries:
    """Read a rectangular delimited file into a series.

    Row numbers in errors are file line numbers (header row = 1). Missing tokens
    are handled by ``missing``; any other non-numeric cell is always an error.
    """
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(errno.ENOENT, "Data file not found", str(path))
    if source.stat().st_size > MAX_DATA_FILE_SIZE:
        raise DataFormatError(f"Data file is too large: {source.stat().st_size} bytes")
    policy = MissingValuePolicy(missing)
    if len(delimiter) != 1:
        raise DataFormatError(f"delimiter must be a single character, got {delimiter!r}")

    rows = _read_rows(source, delimiter)
    if not rows:
        raise DataFormatError(f"{path}: file has no rows")
    if header:
        _, first = rows[0]
        labels = [cell.strip() for cell in first]
        body = rows[1:]
    else:
        labels = [f"x{k}" for k in range(len(rows[0][1]))]
        body = rows
    width = len(labels)
    time_index_col = _resolve_time_column(time_column, labels)
    numeric_cols = [k for k in range(width) if k != time_index_col]

    values: list[list[float]] = []
    stamps: list[str] = []
    last_seen: list[float | None] = [None] * width
    for line, row in body:
        if len(row) != width:
            raise DataFormatError(
                f"row {line}: expected {width} cells, found {len(row)}", row=line
            )
        parsed: list[float] = []
        drop = False
        for k in numeric_cols:
            cell = row[k]
            if is_missing(cell):
                if policy is MissingValuePolicy.STRICT:
                    raise DataFormatError(
                        f"row {line}, column '{labels[k]}': missing value",
                        row=line,
                        column=labels[k],
                    )
                if policy is MissingValuePolicy.DROP_ROW:
                    drop = True
                    continue
                previous = last_seen[k]
                if previous is None:
                    raise DataFormatError(
                        f"row {line}, column '{labels[k]}': missing value with no earlier "
                        "value to carry forward",
                        row=line,
                        column=labels[k],
                    )
                parsed.append(previous)
                continue
            number = as_float(cell, None)
            if number is None:
                raise DataFormatError(
                    f"row {line}, column '{labels[k]}': non-numeric value '{cell.strip()}'",
                    row=line,
                    column=labels[k],
                )
            parsed.append(number)
        if drop:
            logger.debug("Dropped row %s with missing values", line)
            continue
        for k, number in zip(numeric_cols, parsed, strict=True):
            last_seen[k] = number
        values.append(parsed)
        if time_index_col is not None:
            stamps.append(row[time_index_col].strip())

    numeric_labels = tuple(labels[k] for k in numeric_cols)
    if len(numeric_labels) < 2:
        raise DataFormatError(
            f"{path}: need at least 2 numeric columns, found {len(numeric_labels)}"
        )
    if not values:
        raise DataFormatError(f"{path}: no data rows left after applying policy '{policy}'")
    try:
        series = MultivariateSeries(
            labels=numeric_labels,
            values=np.array(values, dtype=np.float64),
            time_index=tuple(stamps) if time_index_col is not None else None,
        )
    except InvalidInputError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    logger.info(
        "Loaded series path=%s rows=%s columns=%s missing=%s", path, series.n, series.d, policy
    )
    return to_log_returns(series) if log_returns else series


def to_log_returns(series: MultivariateSeries) -> MultivariateSeries:
    """log(p_t / p_{t-1}) for a strictly positive price panel; the first row is dropped."""
    if series.n < 2:
        raise DataFormatError("log returns need at least 2 rows")
    bad = np.argwhere(series.values <= 0)
    if bad.size:
        row, col = (int(i) for i in bad[0])
        raise DataFormatError(
            f"log returns need positive prices; column '{series.labels[col]}' has "
            f"{series.values[row, col]} at data row {row + 1}",
            column=series.labels[col],
        )
    returns = np.diff(np.log(series.values), axis=0)
    time_index = series.time_index[1:] if series.time_index is not None else None
    return MultivariateSeries(series.labels, returns, time_index)


class _NodeTask(NamedTuple):
    label: str
    predictors: np.ndarray
    responses: np.ndarray
    config: StreamConfig


def _run_node(task: _NodeTask) -> LambdaTrace:
    try:
        return run_stream((task.predictors, task.responses), task.config)
    except DomainError as exc:
        raise NodeError(f"node '{task.label}': {exc}", node=task.label) from exc


def nodewise_stream(
    series: MultivariateSeries, config: StreamConfig, *, workers: int | None = 1
) -> NodewiseResult:
    """Regress every column on all others and average the node traces.

    Nodes are processed in label order, with the remaining columns as predictors
    in label order, so a column permutation only permutes ``per_node``.
    """
    if series.n <= config.burn_in:
        raise InvalidInputError(f"series length {series.n} must exceed burn_in={config.burn_in}")
    canonical = series.reorder(tuple(sorted(series.labels)))
    tasks = []
    for j, label in enumerate(canonical.labels):
        others = [k for k in range(canonical.d) if k != j]
        responses = canonical.column(label)
        tasks.append(_NodeTask(label, canonical.values[:, others], responses, config))
    traces = run_tasks(_run_node, tasks, workers)
    by_label = dict(zip(canonical.labels, traces, strict=True))

    averaged = normalize_unit_interval(average_traces(traces))
    logger.info(
        "Node-wise stream finished nodes=%s method=%s points=%s",
        series.d,
        config.method,
        len(averaged),
    )
    return NodewiseResult(
        labels=series.labels,
        per_node=tuple(by_label[label] for label in series.labels),
        averaged_normalized=averaged,
    )
