from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from config import DEFAULT_FORGETTING

from .errors import InvalidInputError
from .validation import as_real_array, ensure_count, ensure_open_unit, ensure_positive


@dataclass(frozen=True)
class RapConfig:
    """Tracker settings; step_size and lambda_floor default to fractions of the initial lambda."""

    forgetting: float = DEFAULT_FORGETTING
    step_size: float | None = None
    lambda_floor: float | None = None
    log_space: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "forgetting", ensure_open_unit(self.forgetting, "forgetting"))
        if self.step_size is not None:
            step = float(self.step_size)
            if not np.isfinite(step) or step < 0:
                raise InvalidInputError(f"step_size must be >= 0, got {self.step_size}")
            object.__setattr__(self, "step_size", step)
        if self.lambda_floor is not None:
            object.__setattr__(
                self, "lambda_floor", ensure_positive(self.lambda_floor, "lambda_floor")
            )


@dataclass(frozen=True, eq=False)
class RapState:
    lam: float
    coefficients: np.ndarray
    stat_xx: np.ndarray
    stat_xy: np.ndarray
    forgetting: float
    step_size: float
    lambda_floor: float
    t: int
    log_space: bool = False
    gradient_skipped: bool = False
    last_error: float = 0.0

    def __post_init__(self) -> None:
        coefficients = as_real_array(self.coefficients, "coefficients", ndim=1)
        stat_xx = as_real_array(self.stat_xx, "stat_xx", ndim=2)
        stat_xy = as_real_array(self.stat_xy, "stat_xy", ndim=1)
        p = coefficients.shape[0]
        if stat_xx.shape != (p, p) or stat_xy.shape != (p,):
            raise InvalidInputError("sufficient statistics do not match the coefficient length")
        scale = max(1.0, float(np.abs(stat_xx).max()))
        if not np.allclose(stat_xx, stat_xx.T, rtol=0.0, atol=1e-9 * scale):
            raise InvalidInputError("stat_xx must be symmetric")
        if p and float(np.linalg.eigvalsh(stat_xx)[0]) < -1e-9 * scale:
            raise InvalidInputError("stat_xx must be positive semidefinite")
        floor = ensure_positive(self.lambda_floor, "lambda_floor")
        lam = ensure_positive(self.lam, "lambda")
        if lam < floor:
            raise InvalidInputError(f"lambda {lam} is below the floor {floor}")
        step = float(self.step_size)
        if not np.isfinite(step) or step < 0:
            raise InvalidInputError(f"step_size must be >= 0, got {self.step_size}")
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "stat_xx", stat_xx)
        object.__setattr__(self, "stat_xy", stat_xy)
        object.__setattr__(self, "forgetting", ensure_open_unit(self.forgetting, "forgetting"))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "lambda_floor", floor)
        object.__setattr__(self, "step_size", step)
        object.__setattr__(self, "t", ensure_count(self.t, "t"))

    @property
    def p(self) -> int:
        return int(self.coefficients.shape[0])

    @property
    def active_set(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.coefficients != 0.0))
