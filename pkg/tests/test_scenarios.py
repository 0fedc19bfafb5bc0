import numpy as np
import pytest

from domain.errors import ConfigError, InvalidInputError
from domain.scenarios import CovarianceSpec, PiecewiseSchedule, ScenarioSpec, ones_beta
from services.scenarios import (
    beta_at,
    cholesky_factor,
    generate,
    l0_change,
    l1_change,
    rho_change,
    sample_predictor_row,
    scenario_from_config,
    sigma_change,
    stationary,
    toeplitz_covariance,
)


def test_toeplitz_examples():
    np.testing.assert_array_equal(toeplitz_covariance(CovarianceSpec(0.0, 3)), np.eye(3))
    np.testing.assert_allclose(
        toeplitz_covariance(CovarianceSpec(0.5, 3)),
        [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]],
    )
    factor = cholesky_factor(CovarianceSpec(0.9, 20))
    np.testing.assert_allclose(factor @ factor.T, toeplitz_covariance(CovarianceSpec(0.9, 20)))


@pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
def test_covariance_rejects_non_correlation(rho):
    with pytest.raises(InvalidInputError):
        CovarianceSpec(rho, 3)


@pytest.mark.parametrize(("rho", "p"), [(0.0, 5), (0.5, 20)])
def test_predictor_rows_match_target_covariance(rho, p):
    rng = np.random.default_rng(2024)
    cov = CovarianceSpec(rho, p)
    draws = np.array([sample_predictor_row(rng, cov) for _ in range(100_000)])
    empirical = np.cov(draws, rowvar=False)
    assert np.abs(empirical - toeplitz_covariance(cov)).max() < 0.02


def test_predictor_row_replays_from_seed():
    cov = CovarianceSpec(0.5, 4)
    first = sample_predictor_row(np.random.default_rng(9), cov)
    second = sample_predictor_row(np.random.default_rng(9), cov)
    np.testing.assert_array_equal(first, second)


def test_beta_schedules():
    spec = l1_change()
    np.testing.assert_array_equal(beta_at(spec, 199)[:6], [1, 1, 1, 1, 1, 0])
    np.testing.assert_allclose(beta_at(spec, 200)[:6], [1.0, 0.8, 0.6, 0.4, 0.2, 0.0])
    q15 = beta_at(l0_change(15), 300)
    np.testing.assert_array_equal(q15, ones_beta(20, 15))
    with pytest.raises(InvalidInputError):
        beta_at(spec, 400)


def test_generate_is_bit_identical_for_equal_seeds():
    first = generate(sigma_change(1.5, seed=17))
    second = generate(sigma_change(1.5, seed=17))
    np.testing.assert_array_equal(first.predictors, second.predictors)
    np.testing.assert_array_equal(first.responses, second.responses)
    other = generate(sigma_change(1.5, seed=18))
    assert not np.array_equal(first.responses, other.responses)


def test_noiseless_stream_is_exact():
    schedule = PiecewiseSchedule(change_point=50, sigma_pre=0.0, sigma_post=0.0)
    data = generate(ScenarioSpec(n=100, schedule=schedule, seed=1))
    np.testing.assert_allclose(data.responses, data.predictors @ ones_beta(20, 5))


def test_residual_variance_follows_sigma_schedule():
    schedule = PiecewiseSchedule(change_point=10_000, sigma_pre=1.0, sigma_post=1.5)
    spec = ScenarioSpec(n=20_000, schedule=schedule, seed=5)
    data = generate(spec)
    truth = np.array([beta_at(spec, t) for t in range(spec.n)])
    residuals = data.responses - np.einsum("ij,ij->i", data.predictors, truth)
    assert np.var(residuals[10_000:], ddof=1) == pytest.approx(2.25, rel=0.1)
    assert np.var(residuals[:10_000], ddof=1) == pytest.approx(1.0, rel=0.1)


def test_noiseless_segment_follows_the_sigma_schedule():
    schedule = PiecewiseSchedule(
        change_point=50,
        sigma_pre=0.0,
        sigma_post=2.0,
        beta_pre=ones_beta(4, 2),
        beta_post=ones_beta(4, 2),
    )
    spec = ScenarioSpec(n=100, p=4, schedule=schedule, seed=8)
    data = generate(spec)
    signal = data.predictors @ ones_beta(4, 2)
    assert schedule.sigma_at(49) == 0.0
    assert schedule.sigma_at(50) == 2.0
    np.testing.assert_allclose(data.responses[:50], signal[:50], rtol=1e-12, atol=1e-12)
    assert np.abs(data.responses[50:] - signal[50:]).mean() > 0.5


def test_rho_switch_applies_at_change_point():
    spec = rho_change(0.9, seed=3, rho1=0.1)
    assert spec.schedule.rho_at(199) == 0.1
    assert spec.schedule.rho_at(200) == 0.9
    data = generate(spec)
    after = np.corrcoef(data.predictors[200:, 0], data.predictors[200:, 1])[0, 1]
    before = np.corrcoef(data.predictors[:200, 0], data.predictors[:200, 1])[0, 1]
    assert after > before


def test_stationary_scenario_has_no_change():
    spec = stationary(seed=2, n=300, p=10)
    assert spec.change_point == 150
    schedule = spec.schedule
    assert schedule.sigma_pre == schedule.sigma_post
    assert schedule.rho_pre == schedule.rho_post
    np.testing.assert_array_equal(schedule.beta_pre, schedule.beta_post)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 100, "schedule": PiecewiseSchedule(change_point=100)},
        {"n": 100, "schedule": PiecewiseSchedule(change_point=0)},
        {"p": 10},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(InvalidInputError):
        ScenarioSpec(**kwargs)


def test_with_replicate_offsets_seed():
    spec = ScenarioSpec(seed=100)
    assert spec.with_replicate(3).seed == 103
    assert spec.with_replicate(0) == spec


def test_config_defaults_follow_pre_change_values():
    spec = scenario_from_config({"sigma1": "2.0", "rho1": "0.3", "seed": "7"})
    assert spec.n == 400
    assert spec.change_point == 200
    assert spec.schedule.sigma_post == 2.0
    assert spec.schedule.rho_post == 0.3
    np.testing.assert_array_equal(spec.schedule.beta_post, ones_beta(20, 5))
    assert spec.seed == 7


def test_config_round_trip_through_flat_form():
    specs = [sigma_change(1.7, seed=11), l1_change(seed=2), l0_change(8, seed=4), rho_change(0.6)]
    for spec in specs:
        assert scenario_from_config(spec.to_config()) == spec


def test_explicit_beta_list_wins_over_q():
    spec = scenario_from_config({"p": "3", "beta1": "1, 0, 2", "q1": "1", "q2": "3"})
    np.testing.assert_array_equal(spec.schedule.beta_pre, [1.0, 0.0, 2.0])
    np.testing.assert_array_equal(spec.schedule.beta_post, [1.0, 1.0, 1.0])


@pytest.mark.parametrize(
    "config",
    [
        {"n": "100", "change_point": "100"},
        {"n": "ten"},
        {"rho2": "1.2"},
        {"q2": "25"},
    ],
)
def test_invalid_scenario_config(config):
    with pytest.raises(ConfigError):
        scenario_from_config(config)
