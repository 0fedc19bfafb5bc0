from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError
from .validation import (
    as_real_array,
    ensure_correlation,
    ensure_count,
    ensure_nonnegative,
)


def ones_beta(p: int, q: int) -> np.ndarray:
    """First ``q`` entries 1, the rest 0."""
    p = ensure_count(p, "p", minimum=1)
    q = ensure_count(q, "q")
    if q > p:
        raise InvalidInputError(f"q={q} exceeds p={p}")
    beta = np.zeros(p, dtype=np.float64)
    beta[:q] = 1.0
    return beta


@dataclass(frozen=True)
class CovarianceSpec:
    rho: float
    p: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", ensure_correlation(self.rho, "rho"))
        object.__setattr__(self, "p", ensure_count(self.p, "p", minimum=1))


@dataclass(frozen=True, eq=False)
class PiecewiseSchedule:
    """Pre/post values of sigma, rho and beta switching at ``change_point``."""

    change_point: int
    sigma_pre: float = 1.0
    sigma_post: float = 1.0
    rho_pre: float = 0.5
    rho_post: float = 0.5
    beta_pre: np.ndarray = field(default_factory=lambda: ones_beta(20, 5))
    beta_post: np.ndarray = field(default_factory=lambda: ones_beta(20, 5))

    def __post_init__(self) -> None:
        object.__setattr__(self, "change_point", ensure_count(self.change_point, "change_point"))
        for name in ("sigma_pre", "sigma_post"):
            object.__setattr__(self, name, ensure_nonnegative(getattr(self, name), name))
        for name in ("rho_pre", "rho_post"):
            object.__setattr__(self, name, ensure_correlation(getattr(self, name), name))
        beta_pre = as_real_array(self.beta_pre, "beta_pre", ndim=1)
        beta_post = as_real_array(self.beta_post, "beta_post", ndim=1)
        if beta_pre.shape != beta_post.shape:
            raise InvalidInputError("beta_pre and beta_post must have the same length")
        object.__setattr__(self, "beta_pre", beta_pre)
        object.__setattr__(self, "beta_post", beta_post)

    @property
    def p(self) -> int:
        return int(self.beta_pre.shape[0])

    def sigma_at(self, t: int) -> float:
        return self.sigma_pre if t < self.change_point else self.sigma_post

    def rho_at(self, t: int) -> float:
        return self.rho_pre if t < self.change_point else self.rho_post

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PiecewiseSchedule):
            return NotImplemented
        return (
            self.change_point == other.change_point
            and self.sigma_pre == other.sigma_pre
            and self.sigma_post == other.sigma_post
            and self.rho_pre == other.rho_pre
            and self.rho_post == other.rho_post
            and np.array_equal(self.beta_pre, other.beta_pre)
            and np.array_equal(self.beta_post, other.beta_post)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ScenarioSpec:
    n: int = 400
    p: int = 20
    schedule: PiecewiseSchedule = field(default_factory=lambda: PiecewiseSchedule(200))
    seed: int = 0

    def __post_init__(self) -> None:
        n = ensure_count(self.n, "n", minimum=2)
        p = ensure_count(self.p, "p", minimum=1)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "seed", ensure_count(self.seed, "seed"))
        if self.schedule.p != p:
            raise InvalidInputError(f"schedule beta length {self.schedule.p} does not match p={p}")
        if not 0 < self.schedule.change_point < n:
            raise InvalidInputError(
                f"change point must satisfy 0 < t* < n, got t*={self.schedule.change_point} n={n}"
            )

    @property
    def change_point(self) -> int:
        return self.schedule.change_point

    def with_replicate(self, k: int) -> ScenarioSpec:
        return replace(self, seed=self.seed + ensure_count(k, "replicate"))

    def to_config(self) -> dict[str, str]:
        """Flat key = value form; a beta made of leading ones is written as its q."""
        schedule = self.schedule
        config = {
            "n": str(self.n),
            "p": str(self.p),
            "change_point": str(schedule.change_point),
            "sigma1": repr(schedule.sigma_pre),
            "sigma2": repr(schedule.sigma_post),
            "rho1": repr(schedule.rho_pre),
            "rho2": repr(schedule.rho_post),
            "seed": str(self.seed),
        }
        for suffix, beta in (("1", schedule.beta_pre), ("2", schedule.beta_post)):
            q = int(np.count_nonzero(beta))
            if np.array_equal(beta, ones_beta(self.p, q)):
                config[f"q{suffix}"] = str(q)
            else:
                config[f"beta{suffix}"] = ",".join(repr(float(v)) for v in beta)
        return config


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    predictors: np.ndarray
    responses: np.ndarray
    truth: ScenarioSpec

    def __post_init__(self) -> None:
        predictors = as_real_array(self.predictors, "predictors", ndim=2)
        responses = as_real_array(self.responses, "responses", ndim=1)
        if predictors.shape != (self.truth.n, self.truth.p):
            raise InvalidInputError(
                f"predictors shape {predictors.shape} does not match spec "
                f"({self.truth.n}, {self.truth.p})"
            )
        if responses.shape[0] != self.truth.n:
            raise InvalidInputError("responses length does not match spec")
        object.__setattr__(self, "predictors", predictors)
        object.__setattr__(self, "responses", responses)
