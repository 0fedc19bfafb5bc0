"""Real-time adaptive penalization: projected SGD on lambda against one-step-ahead error."""

from __future__ import annotations

import logging
import math
from dataclasses import replace
from typing import NamedTuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from config import (
    DEFAULT_FLOOR_FRACTION,
    DEFAULT_MAX_ITER,
    DEFAULT_STEP_FRACTION,
    DEFAULT_TOL,
)
from domain.errors import ConvergenceError, InitializationError, InvalidInputError
from domain.grids import LambdaGrid
from domain.policies import SelectionCriterion
from domain.rap_state import RapConfig, RapState
from domain.validation import as_real_array, ensure_finite
from domain.windows import ObservationWindow

from .lasso_core import solve_lasso_from_statistics
from .selector import select_lambda

logger = logging.getLogger(__name__)

MAX_ACTIVE_CONDITION = 1e12
_MAX_LOG_LAMBDA = 700.0


class RapStep(NamedTuple):
    state: RapState
    predicted: float
    error: float


def rap_init(
    burn_in: ObservationWindow,
    config: RapConfig | None = None,
    grid: LambdaGrid | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RapState:
    """Initialize the tracker from a burn-in block.

    The burn-in weights are discounted by the forgetting factor (the newest row keeps
    its weight) so the block matches the recursive statistics. Lambda is chosen by BIC
    on that discounted block and the coefficients are its fit.
    """
    config = config or RapConfig()
    if burn_in.m < 2:
        raise InitializationError(f"burn-in needs at least 2 observations, got {burn_in.m}")
    if float(np.ptp(burn_in.responses)) == 0.0:
        raise InitializationError("burn-in responses have zero variance")

    weighted = burn_in.discounted(config.forgetting)
    try:
        selection = select_lambda(
            weighted, grid or LambdaGrid.relative(), SelectionCriterion.BIC, tol, max_iter
        )
    except InvalidInputError as exc:
        raise InitializationError(f"burn-in cannot seed lambda: {exc}") from exc

    lam0 = float(selection.lam)
    floor = config.lambda_floor
    if floor is None:
        floor = DEFAULT_FLOOR_FRACTION * lam0
    if config.step_size is not None:
        step = config.step_size
    elif config.log_space:
        step = DEFAULT_STEP_FRACTION / lam0
    else:
        step = DEFAULT_STEP_FRACTION * lam0

    state = RapState(
        lam=max(lam0, floor),
        coefficients=selection.fit.coefficients,
        stat_xx=weighted.gram,
        stat_xy=weighted.xty,
        forgetting=config.forgetting,
        step_size=step,
        lambda_floor=floor,
        t=burn_in.m,
        log_space=config.log_space,
    )
    logger.info(
        "RAP initialized lambda=%s step=%s floor=%s forgetting=%s active=%s",
        state.lam,
        step,
        floor,
        config.forgetting,
        len(state.active_set),
    )
    return state


def rap_lambda_gradient(
    stat_xx: np.ndarray, coefficients: np.ndarray, x: np.ndarray, y: float
) -> float | None:
    """d/dlambda of (y - x.beta(lambda))^2 through the active-set Jacobian.

    Returns 0.0 for an empty active set and None when the active block of
    ``stat_xx`` is singular.
    """
    coefficients = np.asarray(coefficients, dtype=np.float64)
    active = np.flatnonzero(coefficients != 0.0)
    if active.size == 0:
        return 0.0
    block = np.asarray(stat_xx, dtype=np.float64)[np.ix_(active, active)]
    condition = np.linalg.cond(block)
    if not np.isfinite(condition) or condition > MAX_ACTIVE_CONDITION:
        return None
    try:
        factor = cho_factor(block)
    except LinAlgError:
        return None
    jacobian = -0.5 * cho_solve(factor, np.sign(coefficients[active]))
    residual = float(y - x @ coefficients)
    return float(-2.0 * residual * (x[active] @ jacobian))


def _next_lambda(state: RapState, gradient: float) -> float:
    if state.log_space:
        theta = math.log(state.lam) - state.step_size * state.lam * gradient
        return max(state.lambda_floor, math.exp(min(theta, _MAX_LOG_LAMBDA)))
    return max(state.lambda_floor, state.lam - state.step_size * gradient)


def rap_step(
    state: RapState,
    x,
    y: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RapStep:
    """Absorb one observation: predict, move lambda, decay statistics, re-solve."""
    row = as_real_array(x, "x", ndim=1)
    if row.shape[0] != state.p:
        raise InvalidInputError(f"x has length {row.shape[0]}, expected {state.p}")
    response = ensure_finite(y, "y")

    predicted = float(row @ state.coefficients)
    error = (response - predicted) ** 2

    # Jacobian belongs to the statistics the current coefficients were solved on.
    gradient = rap_lambda_gradient(state.stat_xx, state.coefficients, row, response)
    if gradient is None:
        logger.debug("RAP gradient skipped at t=%s: singular active block", state.t)
        lam = state.lam
    else:
        lam = _next_lambda(state, gradient)

    stat_xx = state.forgetting * state.stat_xx + np.outer(row, row)
    stat_xy = state.forgetting * state.stat_xy + row * response

    solution = solve_lasso_from_statistics(
        stat_xx, stat_xy, lam, warm_start=state.coefficients, tol=tol, max_iter=max_iter
    )
    if not solution.converged:
        raise ConvergenceError(
            f"RAP re-solve did not converge at lambda={lam:.6g} (kkt={solution.kkt:.3g})",
            lam=lam,
            fit=solution,
        )

    updated = replace(
        state,
        lam=lam,
        coefficients=solution.coefficients,
        stat_xx=stat_xx,
        stat_xy=stat_xy,
        t=state.t + 1,
        gradient_skipped=gradient is None,
        last_error=error,
    )
    return RapStep(state=updated, predicted=predicted, error=error)
