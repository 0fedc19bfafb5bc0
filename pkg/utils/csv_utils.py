import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

from domain.traces import LambdaTrace, RelativeChangeGrid
from utils.tabular_utils import (
    GRID_HEADERS,
    TRACE_HEADERS,
    grid_export_rows,
    traces_export_rows,
)

logger = logging.getLogger(__name__)


def _write_rows(filepath: str | Path, headers: Sequence[str], rows: Iterable[dict]) -> None:
    with open(filepath, "w", newline="", encoding="utf-8") as csvfile:
        writer = csv.DictWriter(csvfile, fieldnames=list(headers), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def export_traces_to_csv(
    traces: Iterable[LambdaTrace], filepath: str | Path, *, node: str = ""
) -> None:
    """One row per (time, replicate) with the lambda value and fit diagnostics."""
    _write_rows(filepath, TRACE_HEADERS, traces_export_rows(traces, node=node))


def export_grid_to_csv(grid: RelativeChangeGrid, filepath: str | Path) -> None:
    _write_rows(filepath, GRID_HEADERS, grid_export_rows(grid))
    logger.debug("Wrote grid cells=%s path=%s", len(grid.cells), filepath)


def read_csv_rows(filepath: str | Path) -> list[dict[str, str]]:
    with open(filepath, newline="", encoding="utf-8") as csvfile:
        return list(csv.DictReader(csvfile))
