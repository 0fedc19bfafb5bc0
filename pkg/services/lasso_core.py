"""Weighted l1-penalized least squares by cyclic coordinate descent.

The objective is the unhalved weighted loss

    L(beta, lam) = sum_i w_i (y_i - x_i . beta)^2 + lam * ||beta||_1

whose optimality conditions read 2 g_j = lam * sign(beta_j) on the active set and
2 |g_j| <= lam elsewhere, with g = X^T W (y - X beta).
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from config import DEFAULT_MAX_ITER, DEFAULT_TOL
from domain.errors import InvalidInputError, UndefinedRatioError
from domain.policies import FitStatus
from domain.validation import as_real_array, ensure_count, ensure_nonnegative, ensure_positive
from domain.windows import LassoFit, ObservationWindow

logger = logging.getLogger(__name__)

SweepCallback = Callable[[int, np.ndarray], None]

# gradients lose about this many ulps of |X^T W y| to cancellation
KKT_ROUNDOFF_ULPS = 1e3


@dataclass(frozen=True, eq=False)
class GramSolution:
    coefficients: np.ndarray
    lam: float
    iterations: int
    kkt: float
    status: FitStatus

    @property
    def converged(self) -> bool:
        return self.status is FitStatus.CONVERGED


def soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def kkt_tolerance(xty: np.ndarray, tol: float) -> float:
    """KKT threshold: ``tol`` unless rounding at the scale of X^T W y is larger."""
    if xty.size == 0:
        return tol
    floor = KKT_ROUNDOFF_ULPS * float(np.finfo(np.float64).eps) * float(np.abs(xty).max())
    return max(tol, floor)


def kkt_violation(gradient: np.ndarray, coefficients: np.ndarray, lam: float) -> float:
    """Max KKT violation given g = X^T W (y - X beta)."""
    if gradient.size == 0:
        return 0.0
    active = coefficients != 0.0
    scaled = 2.0 * gradient
    violations = np.where(
        active,
        np.abs(scaled - lam * np.sign(coefficients)),
        np.maximum(0.0, np.abs(scaled) - lam),
    )
    return float(violations.max())


def _coordinate_descent(
    gram: np.ndarray,
    xty: np.ndarray,
    lam: float,
    beta: np.ndarray,
    *,
    tol: float,
    max_iter: int,
    kkt_fn: Callable[[np.ndarray], float],
    callback: SweepCallback | None = None,
) -> tuple[np.ndarray, int, float, FitStatus]:
    p = beta.shape[0]
    diag = np.diag(gram).copy()
    half_lam = 0.5 * lam
    sweeps = 0
    kkt = kkt_fn(beta)
    kkt_tol = kkt_tolerance(xty, tol)
    full_pass = True

    while sweeps < max_iter:
        # Full passes visit 0..p-1; in between, passes visit the active set in the same order.
        coordinates = range(p) if full_pass else np.flatnonzero(beta != 0.0)
        max_change = 0.0
        for j in coordinates:
            if diag[j] <= 0.0:
                beta[j] = 0.0
                continue
            old = beta[j]
            rho = xty[j] - float(gram[j] @ beta) + diag[j] * old
            new = soft_threshold(rho, half_lam) / diag[j]
            if new != old:
                beta[j] = new
                change = abs(new - old)
                if change > max_change:
                    max_change = change
        sweeps += 1
        if callback is not None:
            callback(sweeps, beta.copy())

        scale = max(1.0, float(np.abs(beta).max()))
        if max_change > tol * scale:
            full_pass = False
            continue
        if not full_pass:
            full_pass = True
            continue
        kkt = kkt_fn(beta)
        if kkt <= kkt_tol:
            return beta, sweeps, kkt, FitStatus.CONVERGED
        # quiet full pass without a KKT certificate: keep polishing with full passes

    kkt = kkt_fn(beta)
    return beta, sweeps, kkt, FitStatus.NOT_CONVERGED


def _initial_beta(warm_start, p: int) -> np.ndarray:
    if warm_start is None:
        return np.zeros(p, dtype=np.float64)
    beta = np.array(as_real_array(warm_start, "warm_start", ndim=1), dtype=np.float64)
    if beta.shape[0] != p:
        raise InvalidInputError(f"warm_start has length {beta.shape[0]}, expected {p}")
    return beta


def lasso_objective(coefficients: np.ndarray, window: ObservationWindow, lam: float) -> float:
    residuals = window.residuals(np.asarray(coefficients, dtype=np.float64))
    return float(window.weights @ residuals**2 + lam * np.abs(coefficients).sum())


def solve_weighted_lasso(
    window: ObservationWindow,
    lam: float,
    warm_start=None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    callback: SweepCallback | None = None,
) -> LassoFit:
    """Minimize the weighted Lasso objective on ``window`` at penalty ``lam``.

    Never raises on non-convergence: the returned fit then carries
    ``FitStatus.NOT_CONVERGED`` and the last iterate.
    """
    lam = ensure_nonnegative(lam, "lambda")
    tol = ensure_positive(tol, "tol")
    max_iter = ensure_count(max_iter, "max_iter", minimum=1)
    beta = _initial_beta(warm_start, window.p)

    def kkt_fn(current: np.ndarray) -> float:
        return kkt_violation(window.weighted_gradient(current), current, lam)

    beta, sweeps, kkt, status = _coordinate_descent(
        window.gram,
        window.xty,
        lam,
        beta,
        tol=tol,
        max_iter=max_iter,
        kkt_fn=kkt_fn,
        callback=callback,
    )
    if status is FitStatus.NOT_CONVERGED:
        logger.warning(
            "Lasso solve did not converge lam=%s sweeps=%s kkt=%s", lam, sweeps, kkt
        )
    residuals = window.residuals(beta)
    objective = float(window.weights @ residuals**2 + lam * np.abs(beta).sum())
    return LassoFit(
        coefficients=beta,
        lam=lam,
        residuals=residuals,
        objective_value=objective,
        iterations=sweeps,
        status=status,
        kkt=kkt,
    )


def solve_lasso_from_statistics(
    stat_xx: np.ndarray,
    stat_xy: np.ndarray,
    lam: float,
    warm_start=None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GramSolution:
    """Coordinate descent on sufficient statistics X^T W X and X^T W y only."""
    gram = as_real_array(stat_xx, "stat_xx", ndim=2)
    xty = as_real_array(stat_xy, "stat_xy", ndim=1)
    if gram.shape != (xty.shape[0], xty.shape[0]):
        raise InvalidInputError(f"stat_xx shape {gram.shape} does not match stat_xy")
    lam = ensure_nonnegative(lam, "lambda")
    tol = ensure_positive(tol, "tol")
    max_iter = ensure_count(max_iter, "max_iter", minimum=1)
    beta = _initial_beta(warm_start, xty.shape[0])

    def kkt_fn(current: np.ndarray) -> float:
        return kkt_violation(xty - gram @ current, current, lam)

    beta, sweeps, kkt, status = _coordinate_descent(
        gram, xty, lam, beta, tol=tol, max_iter=max_iter, kkt_fn=kkt_fn
    )
    if status is FitStatus.NOT_CONVERGED:
        logger.warning(
            "Statistics solve did not converge lam=%s sweeps=%s kkt=%s", lam, sweeps, kkt
        )
    beta.setflags(write=False)
    return GramSolution(coefficients=beta, lam=lam, iterations=sweeps, kkt=kkt, status=status)


def lambda_max(window: ObservationWindow) -> float:
    """Smallest lambda whose solution is the zero vector: 2 * max_j |x_j^T W y|."""
    if window.p == 0:
        return 0.0
    return float(2.0 * np.abs(window.xty).max())


def _check_dimensions(fit: LassoFit, window: ObservationWindow) -> None:
    if fit.coefficients.shape[0] != window.p:
        raise InvalidInputError(
            f"fit has {fit.coefficients.shape[0]} coefficients, window has p={window.p}"
        )


def kkt_residual(fit: LassoFit, window: ObservationWindow) -> float:
    _check_dimensions(fit, window)
    return kkt_violation(window.weighted_gradient(fit.coefficients), fit.coefficients, fit.lam)


def implied_lambda(fit: LassoFit, window: ObservationWindow) -> float:
    """Lambda recovered from the dual identity 2 (y - X b)^T W X b / ||b||_1."""
    _check_dimensions(fit, window)
    norm = fit.l1_norm
    if norm <= 0.0:
        raise UndefinedRatioError("implied lambda is undefined for an all-zero fit")
    residuals = window.residuals(fit.coefficients)
    fitted = window.predictors @ fit.coefficients
    return float(2.0 * (residuals * window.weights) @ fitted / norm)


def degrees_of_freedom(fit: LassoFit) -> int:
    return len(fit.active_set)
