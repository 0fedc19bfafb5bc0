from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from config import DEFAULT_GRID_MIN_RATIO, DEFAULT_GRID_SIZE

from .errors import InvalidInputError
from .policies import GridAnchor
from .validation import ensure_count, ensure_positive


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly decreasing positive lambda values, absolute or relative to lambda_max."""

    values: tuple[float, ...]
    anchor: GridAnchor = GridAnchor.RELATIVE

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if not values:
            raise InvalidInputError("lambda grid must not be empty")
        if any(not np.isfinite(v) or v <= 0 for v in values):
            raise InvalidInputError("lambda grid values must be finite and positive")
        if any(later >= earlier for earlier, later in zip(values, values[1:], strict=False)):
            raise InvalidInputError("lambda grid must be strictly decreasing")
        anchor = GridAnchor(self.anchor)
        if anchor is GridAnchor.RELATIVE and values[0] > 1.0:
            raise InvalidInputError("relative grid fractions must lie in (0, 1]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "anchor", anchor)

    @classmethod
    def relative(
        cls, size: int = DEFAULT_GRID_SIZE, min_ratio: float = DEFAULT_GRID_MIN_RATIO
    ) -> LambdaGrid:
        """``size`` log-spaced fractions of lambda_max from 1 down to ``min_ratio``."""
        size = ensure_count(size, "grid size", minimum=1)
        min_ratio = ensure_positive(min_ratio, "grid min_ratio")
        if min_ratio > 1.0:
            raise InvalidInputError("grid min_ratio must be <= 1")
        if size == 1:
            return cls((1.0,), GridAnchor.RELATIVE)
        if min_ratio == 1.0:
            raise InvalidInputError("grid min_ratio must be < 1 when size > 1")
        fractions = np.geomspace(1.0, min_ratio, size)
        fractions[0] = 1.0
        return cls(tuple(float(f) for f in fractions), GridAnchor.RELATIVE)

    @classmethod
    def absolute(cls, values) -> LambdaGrid:
        return cls(tuple(float(v) for v in values), GridAnchor.ABSOLUTE)

    def __len__(self) -> int:
        return len(self.values)

    def resolve(self, lam_max: float) -> np.ndarray:
        """Absolute lambda values for a window whose lambda_max is ``lam_max``."""
        values = np.asarray(self.values, dtype=np.float64)
        if self.anchor is GridAnchor.ABSOLUTE:
            return values
        if not lam_max > 0.0:
            raise InvalidInputError(
                "relative grid needs lambda_max > 0; the window carries no signal"
            )
        return values * lam_max
