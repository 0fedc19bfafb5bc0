from collections.abc import Sequence

import numpy as np
from prettytable import PrettyTable

from .traces import LambdaTrace, RelativeChangeGrid


def _fmt(value: float) -> str:
    return f"{value:.4g}"


def trace_summary_table(traces: Sequence[LambdaTrace], names: Sequence[str] | None = None) -> str:
    """One row per trace: span, level statistics and mean active-set size."""
    table = PrettyTable()
    table.field_names = [
        "Trace", "Method", "Points", "Start", "End", "Min", "Mean", "Max", "Mean |A|"
    ]
    for index, trace in enumerate(traces):
        name = names[index] if names is not None else str(trace.replicate)
        active = (
            _fmt(float(np.mean(trace.diagnostics.active_size)))
            if trace.diagnostics is not None
            else "-"
        )
        table.add_row(
            [
                name,
                trace.method + (" (normalized)" if trace.normalized else ""),
                len(trace),
                trace.start,
                trace.end,
                _fmt(float(trace.values.min())),
                _fmt(float(trace.values.mean())),
                _fmt(float(trace.values.max())),
                active,
            ]
        )
    return str(table)


def grid_table(grid: RelativeChangeGrid) -> str:
    """Mean lambda_2/lambda_1 (stderr); joint grids are laid out as a matrix."""
    table = PrettyTable()
    if not grid.is_joint:
        table.field_names = [grid.axis1, "lambda2/lambda1", "stderr", "replicates"]
        for cell in grid.cells:
            table.add_row(
                [_fmt(cell.value1), _fmt(cell.mean_ratio), _fmt(cell.stderr), cell.replicates]
            )
        return str(table)

    values2 = grid.values2 or ()
    table.field_names = [f"{grid.axis1} \\ {grid.axis2}", *(_fmt(v) for v in values2)]
    ratios = grid.ratios()
    stderrs = grid.stderrs()
    for i, value1 in enumerate(grid.values1):
        table.add_row(
            [_fmt(value1)]
            + [f"{_fmt(ratios[i, j])} ({_fmt(stderrs[i, j])})" for j in range(len(values2))]
        )
    return str(table)
