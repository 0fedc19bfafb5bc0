"""Piecewise-stationary synthetic regression streams y_t = x_t . beta_t + eps_t."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from functools import lru_cache

import numpy as np
from scipy.linalg import cholesky, toeplitz

from config import DEFAULT_SEED
from domain.errors import ConfigError, InvalidInputError
from domain.scenarios import (
    CovarianceSpec,
    PiecewiseSchedule,
    ScenarioSpec,
    SyntheticDataset,
    ones_beta,
)
from domain.validation import ensure_count

from .config_parser import parse_float, parse_float_list, parse_int

logger = logging.getLogger(__name__)

BASE_N = 400
BASE_P = 20
BASE_CHANGE_POINT = 200
BASE_Q = 5
BASE_RHO = 0.5
RHO_CHANGE_START = 0.1
L1_CHANGE_BETA_HEAD = (1.0, 0.8, 0.6, 0.4, 0.2)


def toeplitz_covariance(spec: CovarianceSpec) -> np.ndarray:
    """Sigma with sigma_ij = rho ** |i - j|."""
    covariance = toeplitz(spec.rho ** np.arange(spec.p, dtype=np.float64))
    covariance.setflags(write=False)
    return covariance


@lru_cache(maxsize=64)
def _cholesky_factor(rho: float, p: int) -> np.ndarray:
    factor = cholesky(toeplitz_covariance(CovarianceSpec(rho, p)), lower=True)
    factor.setflags(write=False)
    return factor


def cholesky_factor(spec: CovarianceSpec) -> np.ndarray:
    return _cholesky_factor(spec.rho, spec.p)


def sample_predictor_row(rng: np.random.Generator, cov: CovarianceSpec) -> np.ndarray:
    """One N_p(0, Sigma) draw as L z with z i.i.d. standard normal."""
    return cholesky_factor(cov) @ rng.standard_normal(cov.p)


def beta_at(spec: ScenarioSpec, t: int) -> np.ndarray:
    t = ensure_count(t, "t")
    if t >= spec.n:
        raise InvalidInputError(f"t={t} is outside 0..{spec.n - 1}")
    schedule = spec.schedule
    return schedule.beta_pre if t < schedule.change_point else schedule.beta_post


def generate(spec: ScenarioSpec) -> SyntheticDataset:
    """Draw the whole stream from ``numpy.random.default_rng(spec.seed)``.

    Innovations for all rows are drawn first, then the noise, so a given seed
    always maps to the same stream regardless of the change point.
    """
    rng = np.random.default_rng(spec.seed)
    schedule = spec.schedule
    cut = schedule.change_point

    innovations = rng.standard_normal((spec.n, spec.p))
    noise = rng.standard_normal(spec.n)

    factor_pre = cholesky_factor(CovarianceSpec(schedule.rho_at(0), spec.p))
    factor_post = cholesky_factor(CovarianceSpec(schedule.rho_at(cut), spec.p))
    predictors = np.empty((spec.n, spec.p), dtype=np.float64)
    predictors[:cut] = innovations[:cut] @ factor_pre.T
    predictors[cut:] = innovations[cut:] @ factor_post.T

    signal = np.empty(spec.n, dtype=np.float64)
    signal[:cut] = predictors[:cut] @ schedule.beta_pre
    signal[cut:] = predictors[cut:] @ schedule.beta_post
    sigma = np.array([schedule.sigma_at(t) for t in range(spec.n)])
    responses = signal + sigma * noise

    logger.debug("Generated scenario n=%s p=%s seed=%s", spec.n, spec.p, spec.seed)
    return SyntheticDataset(predictors=predictors, responses=responses, truth=spec)


def _base_schedule(
    *,
    p: int = BASE_P,
    change_point: int = BASE_CHANGE_POINT,
    sigma: tuple[float, float] = (1.0, 1.0),
    rho: tuple[float, float] = (BASE_RHO, BASE_RHO),
    beta: tuple[np.ndarray, np.ndarray] | None = None,
) -> PiecewiseSchedule:
    if beta is None:
        beta = (ones_beta(p, BASE_Q), ones_beta(p, BASE_Q))
    return PiecewiseSchedule(
        change_point=change_point,
        sigma_pre=sigma[0],
        sigma_post=sigma[1],
        rho_pre=rho[0],
        rho_post=rho[1],
        beta_pre=beta[0],
        beta_post=beta[1],
    )


def stationary(seed: int = 0, *, n: int = BASE_N, p: int = BASE_P) -> ScenarioSpec:
    """No parameter moves; the change point is only a reference index."""
    return ScenarioSpec(n=n, p=p, schedule=_base_schedule(p=p, change_point=n // 2), seed=seed)


def sigma_change(sigma2: float, seed: int = 0, *, sigma1: float = 1.0) -> ScenarioSpec:
    return ScenarioSpec(schedule=_base_schedule(sigma=(sigma1, sigma2)), seed=seed)


def l1_change(seed: int = 0) -> ScenarioSpec:
    post = np.zeros(BASE_P)
    post[: len(L1_CHANGE_BETA_HEAD)] = L1_CHANGE_BETA_HEAD
    return ScenarioSpec(schedule=_base_schedule(beta=(ones_beta(BASE_P, BASE_Q), post)), seed=seed)


def l0_change(q2: int, seed: int = 0, *, q1: int = BASE_Q) -> ScenarioSpec:
    beta = (ones_beta(BASE_P, q1), ones_beta(BASE_P, q2))
    return ScenarioSpec(schedule=_base_schedule(beta=beta), seed=seed)


def rho_change(rho2: float, seed: int = 0, *, rho1: float = RHO_CHANGE_START) -> ScenarioSpec:
    return ScenarioSpec(schedule=_base_schedule(rho=(rho1, rho2)), seed=seed)


def _beta_from_config(config: Mapping[str, str], suffix: str, p: int, default_q: str) -> np.ndarray:
    if config.get(f"beta{suffix}"):
        return np.array(parse_float_list(config[f"beta{suffix}"], f"beta{suffix}"))
    return ones_beta(p, parse_int(config.get(f"q{suffix}", default_q), f"q{suffix}"))


def scenario_from_config(config: Mapping[str, str]) -> ScenarioSpec:
    """Build a spec from flat key = value entries; absent keys take the base scenario.

    Post-change values default to their pre-change counterparts, and an explicit
    ``beta1``/``beta2`` list takes precedence over ``q1``/``q2``.
    """
    try:
        n = parse_int(config.get("n", str(BASE_N)), "n")
        p = parse_int(config.get("p", str(BASE_P)), "p")
        sigma1 = parse_float(config.get("sigma1", "1.0"), "sigma1")
        rho1 = parse_float(config.get("rho1", repr(BASE_RHO)), "rho1")
        beta_pre = _beta_from_config(config, "1", p, str(BASE_Q))
        if config.get("beta2") or config.get("q2"):
            beta_post = _beta_from_config(config, "2", p, str(BASE_Q))
        else:
            beta_post = beta_pre
        schedule = PiecewiseSchedule(
            change_point=parse_int(config.get("change_point", str(n // 2)), "change_point"),
            sigma_pre=sigma1,
            sigma_post=parse_float(config.get("sigma2", repr(sigma1)), "sigma2"),
            rho_pre=rho1,
            rho_post=parse_float(config.get("rho2", repr(rho1)), "rho2"),
            beta_pre=beta_pre,
            beta_post=beta_post,
        )
        seed = parse_int(config.get("seed", str(DEFAULT_SEED)), "seed")
        return ScenarioSpec(n=n, p=p, schedule=schedule, seed=seed)
    except InvalidInputError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc
