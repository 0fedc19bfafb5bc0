from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError
from .validation import as_real_array, ensure_count

AVERAGED = "averaged"
NORMALIZED_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class TraceDiagnostics:
    """Per-point fit summaries: active-set size, l1 norm and weighted mean squared residual."""

    active_size: np.ndarray
    l1_norm: np.ndarray
    mean_squared_residual: np.ndarray

    def __post_init__(self) -> None:
        arrays = {
            name: as_real_array(getattr(self, name), name, ndim=1)
            for name in ("active_size", "l1_norm", "mean_squared_residual")
        }
        if len({array.shape for array in arrays.values()}) != 1:
            raise InvalidInputError("diagnostic series must have equal lengths")
        for name, array in arrays.items():
            if np.any(array < 0):
                raise InvalidInputError(f"{name} must be >= 0")
            object.__setattr__(self, name, array)

    def __len__(self) -> int:
        return int(self.active_size.shape[0])


@dataclass(frozen=True, eq=False)
class LambdaTrace:
    times: np.ndarray
    values: np.ndarray
    method: str
    replicate: int | str = 0
    normalized: bool = False
    diagnostics: TraceDiagnostics | None = None

    def __post_init__(self) -> None:
        values = as_real_array(self.values, "values", ndim=1)
        raw_times = np.asarray(self.times)
        if raw_times.ndim != 1 or not np.issubdtype(raw_times.dtype, np.integer):
            raise InvalidInputError("times must be a 1-dimensional integer sequence")
        times = raw_times.astype(np.int64, copy=True)
        times.setflags(write=False)
        if times.shape != values.shape:
            raise InvalidInputError(
                f"times and values differ in length ({times.shape[0]} vs {values.shape[0]})"
            )
        if times.size == 0:
            raise InvalidInputError("trace must not be empty")
        if np.any(np.diff(times) <= 0):
            raise InvalidInputError("times must be strictly increasing")
        if self.normalized:
            if values.min() < -NORMALIZED_TOLERANCE or values.max() > 1.0 + NORMALIZED_TOLERANCE:
                raise InvalidInputError("normalized values must lie in [0, 1]")
        elif np.any(values <= 0):
            raise InvalidInputError("lambda values must be > 0")
        if self.diagnostics is not None and len(self.diagnostics) != values.shape[0]:
            raise InvalidInputError("diagnostics length does not match the trace")
        if isinstance(self.replicate, str):
            if self.replicate != AVERAGED:
                raise InvalidInputError(f"replicate must be an index or '{AVERAGED}'")
        else:
            object.__setattr__(self, "replicate", ensure_count(self.replicate, "replicate"))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "method", str(self.method))
        object.__setattr__(self, "normalized", bool(self.normalized))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def start(self) -> int:
        return int(self.times[0])

    @property
    def end(self) -> int:
        return int(self.times[-1])

    def with_values(self, values: np.ndarray, *, normalized: bool) -> LambdaTrace:
        return replace(self, values=values, normalized=normalized)


@dataclass(frozen=True)
class GridCell:
    value1: float
    value2: float | None
    mean_ratio: float
    stderr: float
    replicates: int


@dataclass(frozen=True)
class RelativeChangeGrid:
    """Mean lambda_2/lambda_1 for every combination of one or two swept parameters."""

    axis1: str
    values1: tuple[float, ...]
    cells: tuple[GridCell, ...]
    replicates: int
    axis2: str | None = None
    values2: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        values1 = tuple(float(v) for v in self.values1)
        values2 = None if self.values2 is None else tuple(float(v) for v in self.values2)
        if not values1 or (values2 is not None and not values2):
            raise InvalidInputError("grid axes must not be empty")
        if (self.axis2 is None) != (values2 is None):
            raise InvalidInputError("axis2 and values2 must be given together")
        replicates = ensure_count(self.replicates, "replicates", minimum=1)
        expected = len(values1) * (len(values2) if values2 is not None else 1)
        cells = tuple(self.cells)
        if len(cells) != expected:
            raise InvalidInputError(f"grid has {len(cells)} cells, expected {expected}")
        for cell in cells:
            if cell.replicates != replicates:
                raise InvalidInputError("every cell must average the declared replicate count")
            if not np.isfinite(cell.mean_ratio) or cell.mean_ratio <= 0:
                raise InvalidInputError(f"cell ratio must be > 0, got {cell.mean_ratio}")
        object.__setattr__(self, "values1", values1)
        object.__setattr__(self, "values2", values2)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "replicates", replicates)

    @property
    def is_joint(self) -> bool:
        return self.axis2 is not None

    def ratios(self) -> np.ndarray:
        """Mean ratios shaped (len(values1),) or (len(values1), len(values2))."""
        flat = np.array([cell.mean_ratio for cell in self.cells], dtype=np.float64)
        if self.values2 is None:
            return flat
        return flat.reshape(len(self.values1), len(self.values2))

    def stderrs(self) -> np.ndarray:
        flat = np.array([cell.stderr for cell in self.cells], dtype=np.float64)
        if self.values2 is None:
            return flat
        return flat.reshape(len(self.values1), len(self.values2))
