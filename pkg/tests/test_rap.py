import math
from dataclasses import replace

import numpy as np
import pytest

from domain.errors import InitializationError, InvalidInputError
from domain.grids import LambdaGrid
from domain.policies import StreamMethod
from domain.rap_state import RapConfig, RapState
from domain.stream_config import StreamConfig
from domain.windows import ObservationWindow
from services.harness import run_stream
from services.lasso_core import lambda_max, solve_lasso_from_statistics
from services.rap import rap_init, rap_lambda_gradient, rap_step
from services.scenarios import generate, sigma_change

FD_TOL = 1e-11


def _stream(seed: int, n: int = 120, p: int = 6) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:3] = (1.0, -0.7, 0.5)
    return X, X @ beta + 0.5 * rng.standard_normal(n)


def _one_step_error(stat_xx, stat_xy, lam, x, y) -> tuple[float, tuple[int, ...]]:
    solution = solve_lasso_from_statistics(stat_xx, stat_xy, lam, tol=FD_TOL)
    active = tuple(int(j) for j in np.flatnonzero(solution.coefficients))
    return float((y - x @ solution.coefficients) ** 2), active


@pytest.mark.parametrize("seed", range(100))
def test_gradient_matches_central_finite_difference(seed):
    rng = np.random.default_rng(1000 + seed)
    m, p = 60, 5
    X = rng.standard_normal((m, p))
    y = X @ np.array([1.5, -1.0, 0.0, 0.8, 0.0]) + rng.standard_normal(m)
    weights = 0.95 ** np.arange(m - 1, -1, -1)
    stat_xx = (X * weights[:, None]).T @ X
    stat_xy = X.T @ (weights * y)
    lam = 0.3 * float(2.0 * np.abs(stat_xy).max())
    x_new = rng.standard_normal(p)
    y_new = float(rng.standard_normal())

    solution = solve_lasso_from_statistics(stat_xx, stat_xy, lam, tol=FD_TOL)
    analytic = rap_lambda_gradient(stat_xx, solution.coefficients, x_new, y_new)
    assert analytic is not None

    h = 1e-5 * lam
    upper, active_up = _one_step_error(stat_xx, stat_xy, lam + h, x_new, y_new)
    lower, active_down = _one_step_error(stat_xx, stat_xy, lam - h, x_new, y_new)
    assert active_up == active_down == tuple(int(j) for j in np.flatnonzero(solution.coefficients))
    numeric = (upper - lower) / (2.0 * h)
    assert analytic == pytest.approx(numeric, rel=1e-3, abs=1e-9)


def test_gradient_is_zero_for_empty_active_set():
    assert rap_lambda_gradient(np.eye(3), np.zeros(3), np.ones(3), 2.0) == 0.0


def test_gradient_skipped_for_singular_active_block():
    singular = np.array([[1.0, 1.0], [1.0, 1.0]])
    assert rap_lambda_gradient(singular, np.array([1.0, 1.0]), np.ones(2), 0.0) is None


def test_init_accumulates_geometric_statistics():
    responses = np.where(np.arange(50) % 2 == 0, 1.0, 3.0)
    window = ObservationWindow.unit(np.ones((50, 1)), responses)
    state = rap_init(window, RapConfig(forgetting=0.95))
    expected = sum(0.95**k for k in range(50))
    assert state.stat_xx[0, 0] == pytest.approx(expected, rel=1e-12)
    assert state.t == 50


def test_init_on_base_scenario_is_sparse_and_bounded():
    data = generate(sigma_change(1.0, seed=3))
    burn_in = ObservationWindow.unit(data.predictors[:50], data.responses[:50])
    state = rap_init(burn_in)
    weighted = ObservationWindow.exponential(burn_in.predictors, burn_in.responses, 0.95)
    assert 0.0 < state.lam <= lambda_max(weighted)
    magnitude = np.abs(state.coefficients)
    assert magnitude[:5].sum() > magnitude[5:].sum()
    assert state.step_size == pytest.approx(0.05 * state.lam)
    assert state.lambda_floor == pytest.approx(1e-6 * state.lam)


def test_init_log_space_step_default():
    X, y = _stream(0)
    state = rap_init(ObservationWindow.unit(X[:50], y[:50]), RapConfig(log_space=True))
    assert state.step_size == pytest.approx(0.05 / state.lam)


@pytest.mark.parametrize(
    ("predictors", "responses"),
    [
        (np.ones((1, 2)), np.ones(1)),
        (np.random.default_rng(0).standard_normal((10, 2)), np.full(10, 4.0)),
    ],
)
def test_init_rejects_degenerate_burn_in(predictors, responses):
    with pytest.raises(InitializationError):
        rap_init(ObservationWindow.unit(predictors, responses))


def test_step_predicts_with_pre_update_coefficients():
    X, y = _stream(1)
    state = rap_init(ObservationWindow.unit(X[:50], y[:50]))
    step = rap_step(state, X[50], y[50])
    assert step.predicted == pytest.approx(float(X[50] @ state.coefficients))
    assert step.error == pytest.approx((y[50] - step.predicted) ** 2)
    assert step.state.t == 51
    assert step.state.last_error == step.error


def test_statistics_recursion_matches_direct_sum():
    X, y = _stream(2, n=150)
    state = rap_init(ObservationWindow.unit(X[:50], y[:50]))
    for t in range(50, 150):
        state = rap_step(state, X[t], y[t]).state
    direct = ObservationWindow.exponential(X, y, 0.95)
    np.testing.assert_allclose(state.stat_xx, direct.gram, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(state.stat_xy, direct.xty, rtol=1e-10, atol=1e-10)


def test_lambda_respects_floor_under_aggressive_steps():
    X, y = _stream(3, n=200)
    config = RapConfig(step_size=1e3, lambda_floor=0.01)
    state = rap_init(ObservationWindow.unit(X[:50], y[:50]), config)
    for t in range(50, 200):
        state = rap_step(state, X[t], y[t]).state
        assert state.lam >= 0.01


def test_log_space_update_stays_positive():
    X, y = _stream(4, n=150)
    state = rap_init(ObservationWindow.unit(X[:50], y[:50]), RapConfig(log_space=True))
    for t in range(50, 150):
        state = rap_step(state, X[t], y[t]).state
        assert state.lam >= state.lambda_floor
        assert math.isfinite(state.lam)


def test_zero_step_gives_constant_trace():
    data = generate(sigma_change(1.5, seed=4))
    config = StreamConfig(
        method=StreamMethod.RAP,
        burn_in=50,
        grid=LambdaGrid.relative(30),
        rap=RapConfig(step_size=0.0),
    )
    trace = run_stream(data, config)
    assert np.all(trace.values == trace.values[0])
    assert trace.start == 50
    assert trace.end == 399


def test_step_rejects_bad_observation():
    X, y = _stream(5)
    state = rap_init(ObservationWindow.unit(X[:50], y[:50]))
    with pytest.raises(InvalidInputError):
        rap_step(state, X[50][:3], y[50])
    with pytest.raises(InvalidInputError):
        rap_step(state, X[50], float("nan"))


def test_state_rejects_lambda_below_floor():
    X, y = _stream(6)
    state = rap_init(ObservationWindow.unit(X[:50], y[:50]))
    with pytest.raises(InvalidInputError, match="floor"):
        replace(state, lam=state.lambda_floor / 2)


def test_state_requires_symmetric_statistics():
    with pytest.raises(InvalidInputError, match="symmetric"):
        RapState(
            lam=1.0,
            coefficients=np.zeros(2),
            stat_xx=np.array([[1.0, 2.0], [0.0, 1.0]]),
            stat_xy=np.zeros(2),
            forgetting=0.9,
            step_size=0.1,
            lambda_floor=1e-3,
            t=0,
        )


def test_state_requires_positive_semidefinite_statistics():
    with pytest.raises(InvalidInputError, match="positive semidefinite"):
        RapState(
            lam=1.0,
            coefficients=np.zeros(2),
            stat_xx=np.array([[1.0, 2.0], [2.0, 1.0]]),
            stat_xy=np.zeros(2),
            forgetting=0.9,
            step_size=0.1,
            lambda_floor=1e-3,
            t=0,
        )


def test_init_keeps_caller_weights_under_forgetting(small_window):
    weights = np.linspace(0.5, 2.0, small_window.m)
    burn_in = ObservationWindow(small_window.predictors, small_window.responses, weights)

    state = rap_init(burn_in, RapConfig(forgetting=0.9))

    ages = np.arange(burn_in.m - 1, -1, -1)
    expected = ObservationWindow(burn_in.predictors, burn_in.responses, weights * 0.9**ages)
    np.testing.assert_allclose(state.stat_xx, expected.gram, rtol=1e-12, atol=1e-10)
    np.testing.assert_allclose(state.stat_xy, expected.xty, rtol=1e-12, atol=1e-10)
    assert 0.0 < state.lam <= lambda_max(expected)


def test_init_statistics_scale_with_burn_in_weights(small_window):
    heavy = ObservationWindow(
        small_window.predictors, small_window.responses, np.full(small_window.m, 100.0)
    )

    unit_state = rap_init(small_window)
    heavy_state = rap_init(heavy)

    np.testing.assert_allclose(
        heavy_state.stat_xx, 100.0 * unit_state.stat_xx, rtol=1e-12, atol=1e-9
    )
    np.testing.assert_allclose(
        heavy_state.stat_xy, 100.0 * unit_state.stat_xy, rtol=1e-12, atol=1e-9
    )
