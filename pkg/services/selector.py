"""Sliding-window lambda selection over a warm-started path by BIC or GCV."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np

from config import DEFAULT_MAX_ITER, DEFAULT_TOL
from domain.errors import ConvergenceError
from domain.grids import LambdaGrid
from domain.policies import SelectionCriterion
from domain.windows import LassoFit, ObservationWindow

from .lasso_core import degrees_of_freedom, lambda_max, solve_weighted_lasso

logger = logging.getLogger(__name__)


class LambdaSelection(NamedTuple):
    lam: float
    fit: LassoFit


def lasso_path(
    window: ObservationWindow,
    grid: LambdaGrid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[LassoFit]:
    """One fit per grid value, each warm-started from the previous one."""
    lambdas = grid.resolve(lambda_max(window))
    fits: list[LassoFit] = []
    warm = None
    for lam in lambdas:
        fit = solve_weighted_lasso(window, float(lam), warm_start=warm, tol=tol, max_iter=max_iter)
        if not fit.converged:
            raise ConvergenceError(
                f"lasso path did not converge at lambda={float(lam):.6g} "
                f"after {fit.iterations} sweeps (kkt={fit.kkt:.3g})",
                lam=float(lam),
                fit=fit,
            )
        fits.append(fit)
        warm = fit.coefficients
    return fits


def _weighted_rss(fit: LassoFit, window: ObservationWindow) -> float:
    return float(window.weights @ fit.residuals**2)


def bic_score(fit: LassoFit, window: ObservationWindow) -> float:
    m_eff = window.effective_size
    rss = _weighted_rss(fit, window)
    if rss <= 0.0:
        return math.inf
    return m_eff * math.log(rss / m_eff) + degrees_of_freedom(fit) * math.log(m_eff)


def gcv_score(fit: LassoFit, window: ObservationWindow) -> float:
    m_eff = window.effective_size
    df = degrees_of_freedom(fit)
    if df >= m_eff:
        return math.inf
    rss = _weighted_rss(fit, window)
    return (rss / m_eff) / (1.0 - df / m_eff) ** 2


_SCORERS = {
    SelectionCriterion.BIC: bic_score,
    SelectionCriterion.GCV: gcv_score,
}


def criterion_scores(
    fits: Sequence[LassoFit], window: ObservationWindow, criterion: SelectionCriterion
) -> np.ndarray:
    scorer = _SCORERS[SelectionCriterion(criterion)]
    return np.array([scorer(fit, window) for fit in fits], dtype=np.float64)


def select_lambda(
    window: ObservationWindow,
    grid: LambdaGrid,
    criterion: SelectionCriterion,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> LambdaSelection:
    """Grid value minimizing the criterion; ties go to the larger lambda."""
    fits = lasso_path(window, grid, tol=tol, max_iter=max_iter)
    scores = criterion_scores(fits, window, criterion)
    # grid is strictly decreasing, so the first minimum is the largest lambda
    best = int(np.argmin(scores))
    chosen = fits[best]
    logger.debug(
        "Selected lambda=%s criterion=%s score=%s df=%s",
        chosen.lam,
        criterion,
        scores[best],
        degrees_of_freedom(chosen),
    )
    return LambdaSelection(lam=chosen.lam, fit=chosen)
