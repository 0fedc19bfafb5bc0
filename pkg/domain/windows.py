from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidInputError
from .policies import FitStatus
from .validation import as_real_array, ensure_nonnegative, ensure_open_unit


@dataclass(frozen=True, eq=False)
class ObservationWindow:
    """A contiguous block of (predictor row, response) pairs with positive weights."""

    predictors: np.ndarray
    responses: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        predictors = as_real_array(self.predictors, "predictors", ndim=2)
        responses = as_real_array(self.responses, "responses", ndim=1)
        weights = as_real_array(self.weights, "weights", ndim=1)
        m, p = predictors.shape
        if m < 1 or p < 1:
            raise InvalidInputError(f"window needs m >= 1 and p >= 1, got {predictors.shape}")
        if responses.shape[0] != m or weights.shape[0] != m:
            raise InvalidInputError(
                f"row count mismatch: predictors={m} responses={responses.shape[0]} "
                f"weights={weights.shape[0]}"
            )
        if np.any(weights <= 0):
            raise InvalidInputError("weights must be strictly positive")
        object.__setattr__(self, "predictors", predictors)
        object.__setattr__(self, "responses", responses)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def unit(cls, predictors, responses) -> ObservationWindow:
        rows = np.asarray(responses).shape[0]
        return cls(predictors, responses, np.ones(rows))

    @classmethod
    def exponential(cls, predictors, responses, forgetting: float) -> ObservationWindow:
        """Weight the newest row 1 and a row of age a by forgetting**a."""
        rate = ensure_open_unit(forgetting, "forgetting")
        rows = np.asarray(responses).shape[0]
        ages = np.arange(rows - 1, -1, -1, dtype=np.float64)
        return cls(predictors, responses, rate**ages)

    def discounted(self, forgetting: float) -> ObservationWindow:
        """The same rows with each weight multiplied by forgetting**age (newest age 0)."""
        rate = ensure_open_unit(forgetting, "forgetting")
        ages = np.arange(self.m - 1, -1, -1, dtype=np.float64)
        return ObservationWindow(self.predictors, self.responses, self.weights * rate**ages)

    @property
    def m(self) -> int:
        return int(self.predictors.shape[0])

    @property
    def p(self) -> int:
        return int(self.predictors.shape[1])

    @property
    def effective_size(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def gram(self) -> np.ndarray:
        """X^T W X."""
        weighted = self.predictors * self.weights[:, None]
        gram = weighted.T @ self.predictors
        gram = 0.5 * (gram + gram.T)
        gram.setflags(write=False)
        return gram

    @cached_property
    def xty(self) -> np.ndarray:
        """X^T W y."""
        xty = self.predictors.T @ (self.weights * self.responses)
        xty.setflags(write=False)
        return xty

    def residuals(self, coefficients: np.ndarray) -> np.ndarray:
        return self.responses - self.predictors @ coefficients

    def weighted_gradient(self, coefficients: np.ndarray) -> np.ndarray:
        """g = X^T W (y - X beta), computed from explicit residuals."""
        return self.predictors.T @ (self.weights * self.residuals(coefficients))


@dataclass(frozen=True, eq=False)
class LassoFit:
    coefficients: np.ndarray
    lam: float
    residuals: np.ndarray
    objective_value: float
    iterations: int
    status: FitStatus = FitStatus.CONVERGED
    kkt: float = 0.0
    active_set: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        coefficients = np.array(self.coefficients, dtype=np.float64)
        residuals = np.array(self.residuals, dtype=np.float64)
        coefficients.setflags(write=False)
        residuals.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "residuals", residuals)
        object.__setattr__(self, "lam", ensure_nonnegative(self.lam, "lambda"))
        object.__setattr__(
            self, "active_set", tuple(int(j) for j in np.flatnonzero(coefficients != 0.0))
        )

    @property
    def converged(self) -> bool:
        return self.status is FitStatus.CONVERGED

    @property
    def l1_norm(self) -> float:
        return float(np.abs(self.coefficients).sum())
