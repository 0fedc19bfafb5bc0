from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .validation import as_real_array


@dataclass(frozen=True, eq=False)
class MultivariateSeries:
    """n x d panel of finite reals with unique column labels."""

    labels: tuple[str, ...]
    values: np.ndarray
    time_index: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        labels = tuple(str(label) for label in self.labels)
        values = as_real_array(self.values, "values", ndim=2)
        n, d = values.shape
        if d < 2:
            raise InvalidInputError(f"series needs at least 2 columns, got {d}")
        if n < 1:
            raise InvalidInputError("series has no rows")
        if len(labels) != d:
            raise InvalidInputError(f"{len(labels)} labels for {d} columns")
        if len(set(labels)) != d:
            raise InvalidInputError("column labels must be unique")
        if self.time_index is not None:
            time_index = tuple(str(stamp) for stamp in self.time_index)
            if len(time_index) != n:
                raise InvalidInputError("time_index length does not match the row count")
            object.__setattr__(self, "time_index", time_index)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.values.shape[1])

    def column(self, label: str) -> np.ndarray:
        try:
            return self.values[:, self.labels.index(label)]
        except ValueError as exc:
            raise InvalidInputError(f"unknown column '{label}'") from exc

    def reorder(self, labels: tuple[str, ...]) -> MultivariateSeries:
        if sorted(labels) != sorted(self.labels):
            raise InvalidInputError("reorder needs a permutation of the existing labels")
        order = [self.labels.index(label) for label in labels]
        return MultivariateSeries(labels, self.values[:, order], self.time_index)
