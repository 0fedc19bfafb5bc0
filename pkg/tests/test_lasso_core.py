import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from config import DEFAULT_MAX_ITER
from domain.errors import InvalidInputError, UndefinedRatioError
from domain.policies import FitStatus
from domain.windows import ObservationWindow
from services.lasso_core import (
    degrees_of_freedom,
    implied_lambda,
    kkt_residual,
    kkt_tolerance,
    lambda_max,
    lasso_objective,
    soft_threshold,
    solve_lasso_from_statistics,
    solve_weighted_lasso,
)

TOL = 1e-8


def _univariate_window() -> ObservationWindow:
    return ObservationWindow.unit([[1.0], [1.0]], [1.0, 3.0])


def _random_window(seed: int, m: int, p: int, *, weighted: bool = False) -> ObservationWindow:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, p))
    beta = np.zeros(p)
    beta[: max(1, p // 3)] = rng.uniform(0.5, 2.0, max(1, p // 3))
    y = X @ beta + rng.standard_normal(m)
    if weighted:
        return ObservationWindow.exponential(X, y, 0.9)
    return ObservationWindow.unit(X, y)


def _brute_force_objective(window: ObservationWindow, lam: float) -> float:
    """Best objective over every sign pattern, each solved as a smooth quadratic."""
    best = lasso_objective(np.zeros(window.p), window, lam)
    for signs in itertools.product((-1.0, 0.0, 1.0), repeat=window.p):
        signs = np.array(signs)
        active = np.flatnonzero(signs)
        if active.size == 0:
            continue
        gram = window.gram[np.ix_(active, active)]
        rhs = window.xty[active] - 0.5 * lam * signs[active]
        try:
            solution = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            continue
        candidate = np.zeros(window.p)
        candidate[active] = solution
        best = min(best, lasso_objective(candidate, window, lam))
    return best


@pytest.mark.parametrize(
    ("value", "threshold", "expected"),
    [(4.0, 1.0, 3.0), (-4.0, 1.0, -3.0), (0.5, 1.0, 0.0), (-1.0, 1.0, 0.0)],
)
def test_soft_threshold(value, threshold, expected):
    assert soft_threshold(value, threshold) == expected


def test_univariate_closed_form():
    window = _univariate_window()
    fit = solve_weighted_lasso(window, 2.0)
    assert fit.converged
    assert fit.coefficients[0] == pytest.approx(1.5, abs=1e-12)
    assert fit.objective_value == pytest.approx(0.25 + 2.25 + 3.0, rel=1e-10)
    assert kkt_residual(fit, window) <= 1e-12
    assert implied_lambda(fit, window) == pytest.approx(2.0, abs=1e-8)
    assert degrees_of_freedom(fit) == 1


def test_lambda_max_examples():
    assert lambda_max(_univariate_window()) == 8.0
    assert lambda_max(ObservationWindow.unit([[1.0], [2.0]], [0.0, 0.0])) == 0.0
    orthogonal = ObservationWindow.unit([[1.0, 1.0], [1.0, -1.0]], [1.0, -1.0])
    assert lambda_max(orthogonal) == 4.0
    assert lambda_max(ObservationWindow.unit([[1.0], [-1.0]], [1.0, 1.0])) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_zero_solution_iff_lambda_at_least_lambda_max(seed):
    window = _random_window(seed, 40, 8)
    lam_max = lambda_max(window)
    at_max = solve_weighted_lasso(window, lam_max)
    assert not np.any(at_max.coefficients)
    assert kkt_residual(at_max, window) <= 1e-12
    above = solve_weighted_lasso(window, 3.0 * lam_max)
    assert not np.any(above.coefficients)
    below = solve_weighted_lasso(window, 0.5 * lam_max)
    assert np.any(below.coefficients)


def test_zero_fit_below_lambda_max_violates_kkt():
    window = _random_window(3, 30, 4)
    zero = solve_weighted_lasso(window, lambda_max(window))
    relaxed = type(zero)(
        coefficients=zero.coefficients,
        lam=0.5 * lambda_max(window),
        residuals=zero.residuals,
        objective_value=zero.objective_value,
        iterations=0,
    )
    assert kkt_residual(relaxed, window) > 0.0


def test_zero_penalty_gives_weighted_least_squares():
    window = _random_window(7, 60, 5, weighted=True)
    fit = solve_weighted_lasso(window, 0.0, tol=1e-12)
    expected = np.linalg.solve(window.gram, window.xty)
    np.testing.assert_allclose(fit.coefficients, expected, atol=1e-8)


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    p=st.integers(1, 20),
    m=st.integers(5, 100),
    fraction=st.floats(0.01, 1.0),
    weighted=st.booleans(),
)
def test_kkt_certificate_and_dual_identity(seed, p, m, fraction, weighted):
    window = _random_window(seed, m, p, weighted=weighted)
    lam = fraction * lambda_max(window)
    fit = solve_weighted_lasso(window, lam, tol=TOL)
    if not fit.converged:
        return
    assert kkt_residual(fit, window) <= TOL
    if fit.active_set:
        assert abs(implied_lambda(fit, window) - lam) <= max(10 * TOL, 1e-8 * lam)


@settings(max_examples=100, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    p=st.integers(1, 3),
    m=st.integers(4, 20),
    fraction=st.floats(0.01, 1.0),
)
def test_objective_matches_sign_pattern_oracle(seed, p, m, fraction):
    window = _random_window(seed, m, p)
    lam = fraction * lambda_max(window)
    fit = solve_weighted_lasso(window, lam, tol=TOL)
    assert fit.converged
    assert fit.objective_value == pytest.approx(_brute_force_objective(window, lam), abs=1e-6)
    assert fit.objective_value == pytest.approx(
        lasso_objective(fit.coefficients, window, lam), rel=1e-10
    )


def test_objective_never_increases_between_sweeps():
    window = _random_window(11, 50, 10)
    lam = 0.1 * lambda_max(window)
    objectives: list[float] = []
    solve_weighted_lasso(
        window,
        lam,
        callback=lambda _sweep, beta: objectives.append(lasso_objective(beta, window, lam)),
    )
    assert len(objectives) >= 2
    for before, after in zip(objectives, objectives[1:]):
        assert after <= before + 1e-10 * max(1.0, abs(before))


def test_warm_start_matches_cold_start():
    window = _random_window(5, 50, 6)
    lam = 0.2 * lambda_max(window)
    cold = solve_weighted_lasso(window, lam)
    warm = solve_weighted_lasso(window, lam, warm_start=np.ones(6))
    np.testing.assert_allclose(warm.coefficients, cold.coefficients, atol=10 * TOL)


def test_non_convergence_is_reported_not_raised():
    window = _random_window(2, 30, 10)
    fit = solve_weighted_lasso(window, 0.01 * lambda_max(window), max_iter=1)
    assert fit.status is FitStatus.NOT_CONVERGED
    assert fit.iterations == 1


def test_statistics_solver_matches_window_solver():
    window = _random_window(9, 40, 5)
    lam = 0.3 * lambda_max(window)
    direct = solve_weighted_lasso(window, lam)
    from_stats = solve_lasso_from_statistics(window.gram, window.xty, lam)
    assert from_stats.converged
    np.testing.assert_allclose(from_stats.coefficients, direct.coefficients, atol=10 * TOL)


@pytest.mark.parametrize(
    "kwargs",
    [{"lam": -1.0}, {"lam": 1.0, "tol": 0.0}, {"lam": 1.0, "max_iter": 0}],
)
def test_solver_rejects_invalid_arguments(kwargs):
    with pytest.raises(InvalidInputError):
        solve_weighted_lasso(_univariate_window(), **kwargs)


def test_warm_start_length_is_checked():
    with pytest.raises(InvalidInputError, match="warm_start"):
        solve_weighted_lasso(_univariate_window(), 1.0, warm_start=[0.0, 0.0])


def test_implied_lambda_undefined_for_zero_fit():
    window = _univariate_window()
    fit = solve_weighted_lasso(window, 10.0)
    with pytest.raises(UndefinedRatioError):
        implied_lambda(fit, window)


@pytest.mark.parametrize("scale", [2.0, 1e3])
def test_scaling_responses_and_penalty_scales_coefficients(scale):
    window = _random_window(13, 50, 8)
    lam = 0.2 * lambda_max(window)
    base = solve_weighted_lasso(window, lam)
    scaled_window = ObservationWindow.unit(window.predictors, scale * window.responses)
    scaled = solve_weighted_lasso(scaled_window, scale * lam)
    assert scaled.converged
    np.testing.assert_allclose(scaled.coefficients, scale * base.coefficients, atol=scale * 1e-7)


@pytest.mark.parametrize("fraction", [0.5, 0.1, 0.01])
def test_price_level_data_converges(fraction):
    rng = np.random.default_rng(21)
    X = 1e4 * rng.standard_normal((50, 6))
    y = X @ np.array([0.6, 0.3, 0.0, 0.0, 0.1, 0.0]) + 1e3 * rng.standard_normal(50)
    window = ObservationWindow.unit(X, y)
    lam = fraction * lambda_max(window)

    fit = solve_weighted_lasso(window, lam)

    assert fit.converged
    assert fit.iterations < DEFAULT_MAX_ITER
    assert kkt_residual(fit, window) <= kkt_tolerance(window.xty, TOL)
    assert kkt_tolerance(window.xty, TOL) < 1e-10 * lam


def test_kkt_tolerance_is_absolute_on_unit_scale_data():
    window = _random_window(4, 100, 20)
    assert kkt_tolerance(window.xty, TOL) == TOL
    assert kkt_tolerance(np.empty(0), TOL) == TOL


def test_zero_column_drops_its_warm_start():
    X = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]])
    window = ObservationWindow.unit(X, [1.0, 2.5, 2.5, 4.5])

    fit = solve_weighted_lasso(window, 0.5, warm_start=[0.0, 3.0])

    assert fit.converged
    assert fit.coefficients[1] == 0.0
    assert fit.active_set == (0,)
