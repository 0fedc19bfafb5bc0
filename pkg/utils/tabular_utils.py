from __future__ import annotations

from collections.abc import Iterable

from domain.traces import LambdaTrace, RelativeChangeGrid

TRACE_HEADERS = [
    "node",
    "replicate",
    "time",
    "method",
    "lambda",
    "normalized",
    "active_size",
    "l1_norm",
    "mean_squared_residual",
]
GRID_HEADERS = ["axis1", "value1", "axis2", "value2", "mean_ratio", "stderr", "replicates"]


def format_number(value: float) -> str:
    """Shortest round-tripping text for a float."""
    return repr(float(value))


def trace_export_rows(trace: LambdaTrace, *, node: str = "") -> list[dict[str, object]]:
    diagnostics = trace.diagnostics
    rows: list[dict[str, object]] = []
    for index, (time, value) in enumerate(zip(trace.times, trace.values, strict=True)):
        row: dict[str, object] = {
            "node": node,
            "replicate": trace.replicate,
            "time": int(time),
            "method": trace.method,
            "lambda": format_number(value),
            "normalized": "true" if trace.normalized else "false",
            "active_size": "",
            "l1_norm": "",
            "mean_squared_residual": "",
        }
        if diagnostics is not None:
            row["active_size"] = format_number(diagnostics.active_size[index])
            row["l1_norm"] = format_number(diagnostics.l1_norm[index])
            row["mean_squared_residual"] = format_number(diagnostics.mean_squared_residual[index])
        rows.append(row)
    return rows


def traces_export_rows(
    traces: Iterable[LambdaTrace], *, node: str = ""
) -> list[dict[str, object]]:
    rows: list[dict[str, object]] = []
    for trace in traces:
        rows.extend(trace_export_rows(trace, node=node))
    return rows


def grid_export_rows(grid: RelativeChangeGrid) -> list[dict[str, object]]:
    return [
        {
            "axis1": grid.axis1,
            "value1": format_number(cell.value1),
            "axis2": grid.axis2 or "",
            "value2": "" if cell.value2 is None else format_number(cell.value2),
            "mean_ratio": format_number(cell.mean_ratio),
            "stderr": format_number(cell.stderr),
            "replicates": cell.replicates,
        }
        for cell in grid.cells
    ]
