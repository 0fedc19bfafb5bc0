"""Streaming lambda traces over replicated scenarios, their summaries and parameter sweeps."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from domain.errors import (
    DegenerateRangeError,
    DomainError,
    InvalidInputError,
    StreamError,
    UndefinedRatioError,
)
from domain.policies import StreamMethod, WindowWeighting
from domain.scenarios import ScenarioSpec, SyntheticDataset, ones_beta
from domain.stream_config import StreamConfig
from domain.traces import AVERAGED, GridCell, LambdaTrace, RelativeChangeGrid, TraceDiagnostics
from domain.validation import as_real_array, ensure_count, ensure_same_length
from domain.windows import ObservationWindow

from .parallel import run_tasks
from .rap import rap_init, rap_step
from .scenarios import RHO_CHANGE_START, generate
from .selector import select_lambda

logger = logging.getLogger(__name__)

SWEEP_AXES = ("sigma2", "q2", "rho2")
JOINT_AXIS_PAIRS = frozenset(
    {frozenset({"q2", "sigma2"}), frozenset({"rho2", "sigma2"}), frozenset({"q2", "rho2"})}
)

SIGMA_SWEEP = tuple(round(1.0 + 0.1 * k, 1) for k in range(1, 11))
Q_SWEEP = (6, 7, 8, 9, 10, 15)
RHO_SWEEP = tuple(round(0.1 * k, 1) for k in range(2, 10))


class StreamInput(NamedTuple):
    predictors: np.ndarray
    responses: np.ndarray


@dataclass(frozen=True)
class SweepPreset:
    axis: str
    values: tuple[float, ...]
    axis2: str | None = None
    values2: tuple[float, ...] | None = None
    rho1: float | None = None

    def base_spec(self, seed: int) -> ScenarioSpec:
        spec = ScenarioSpec(seed=seed)
        if self.rho1 is None:
            return spec
        return replace(spec, schedule=replace(spec.schedule, rho_pre=self.rho1, rho_post=self.rho1))


SWEEP_PRESETS: dict[str, SweepPreset] = {
    "sigma": SweepPreset("sigma2", SIGMA_SWEEP),
    "q": SweepPreset("q2", Q_SWEEP),
    "rho": SweepPreset("rho2", RHO_SWEEP, rho1=RHO_CHANGE_START),
    "q_sigma": SweepPreset("q2", Q_SWEEP, "sigma2", SIGMA_SWEEP),
    "rho_sigma": SweepPreset("rho2", RHO_SWEEP, "sigma2", SIGMA_SWEEP, rho1=RHO_CHANGE_START),
    "q_rho": SweepPreset("q2", Q_SWEEP, "rho2", RHO_SWEEP, rho1=RHO_CHANGE_START),
}


def _stream_input(data: SyntheticDataset | tuple) -> StreamInput:
    if isinstance(data, SyntheticDataset):
        return StreamInput(data.predictors, data.responses)
    try:
        predictors, responses = data
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(
            "stream data must be a dataset or a (predictors, responses) pair"
        ) from exc
    predictors = as_real_array(predictors, "predictors", ndim=2)
    responses = as_real_array(responses, "responses", ndim=1)
    ensure_same_length("stream data", predictors, responses)
    return StreamInput(predictors, responses)


def _window_at(stream: StreamInput, t: int, config: StreamConfig) -> ObservationWindow:
    """Rows t - L + 1 .. t, rectangular or exponentially weighted."""
    rows = slice(t - config.window_length + 1, t + 1)
    if config.weighting is WindowWeighting.EXPONENTIAL:
        return ObservationWindow.exponential(
            stream.predictors[rows], stream.responses[rows], config.window_forgetting
        )
    return ObservationWindow.unit(stream.predictors[rows], stream.responses[rows])


def _windowed_trace(stream: StreamInput, config: StreamConfig) -> tuple[list[float], list[tuple]]:
    values: list[float] = []
    diagnostics: list[tuple[float, float, float]] = []
    n = stream.responses.shape[0]
    for t in range(config.burn_in, n):
        try:
            window = _window_at(stream, t, config)
            selection = select_lambda(
                window, config.grid, config.method.criterion, config.tol, config.max_iter
            )
        except DomainError as exc:
            raise StreamError(f"stream failed at t={t}: {exc}", t=t) from exc
        fit = selection.fit
        residual = float(window.weights @ fit.residuals**2) / window.effective_size
        values.append(selection.lam)
        diagnostics.append((len(fit.active_set), fit.l1_norm, residual))
    return values, diagnostics


def _rap_trace(stream: StreamInput, config: StreamConfig) -> tuple[list[float], list[tuple]]:
    burn_in = ObservationWindow.unit(
        stream.predictors[: config.burn_in], stream.responses[: config.burn_in]
    )
    try:
        state = rap_init(burn_in, config.rap, config.grid, config.tol, config.max_iter)
    except DomainError as exc:
        raise StreamError(f"stream failed at t={config.burn_in}: {exc}", t=config.burn_in) from exc

    values: list[float] = []
    diagnostics: list[tuple[float, float, float]] = []
    # one-step errors averaged with the same forgetting as the statistics
    error_sum = 0.0
    weight_sum = 0.0
    n = stream.responses.shape[0]
    for t in range(config.burn_in, n):
        try:
            step = rap_step(
                state, stream.predictors[t], stream.responses[t], config.tol, config.max_iter
            )
        except DomainError as exc:
            raise StreamError(f"stream failed at t={t}: {exc}", t=t) from exc
        state = step.state
        error_sum = state.forgetting * error_sum + step.error
        weight_sum = state.forgetting * weight_sum + 1.0
        values.append(state.lam)
        diagnostics.append(
            (len(state.active_set), float(np.abs(state.coefficients).sum()), error_sum / weight_sum)
        )
    return values, diagnostics


def run_stream(
    data: SyntheticDataset | tuple, config: StreamConfig, *, replicate: int = 0
) -> LambdaTrace:
    """Lambda trace for t = burn_in .. n-1; the value at t includes observation t."""
    stream = _stream_input(data)
    n = stream.responses.shape[0]
    if n <= config.burn_in:
        raise InvalidInputError(f"stream length {n} must exceed burn_in={config.burn_in}")

    if config.method is StreamMethod.RAP:
        values, diagnostics = _rap_trace(stream, config)
    else:
        values, diagnostics = _windowed_trace(stream, config)

    active, l1, residual = (np.array(column, dtype=np.float64) for column in zip(*diagnostics))
    trace = LambdaTrace(
        times=np.arange(config.burn_in, n),
        values=np.array(values),
        method=config.method.value,
        replicate=replicate,
        diagnostics=TraceDiagnostics(active, l1, residual),
    )
    logger.debug(
        "Stream finished method=%s replicate=%s points=%s", trace.method, replicate, len(trace)
    )
    return trace


def average_traces(traces: Sequence[LambdaTrace]) -> LambdaTrace:
    """Pointwise mean of traces sharing a time axis and method."""
    if not traces:
        raise InvalidInputError("nothing to average")
    first = traces[0]
    for trace in traces[1:]:
        if trace.method != first.method:
            raise InvalidInputError(f"method mismatch: {first.method} vs {trace.method}")
        if not np.array_equal(trace.times, first.times):
            raise InvalidInputError("traces have different time axes")
    if any(trace.normalized for trace in traces):
        raise InvalidInputError("average raw traces, then normalize")

    diagnostics = None
    if all(trace.diagnostics is not None for trace in traces):
        diagnostics = TraceDiagnostics(
            *(
                np.mean([getattr(trace.diagnostics, name) for trace in traces], axis=0)
                for name in ("active_size", "l1_norm", "mean_squared_residual")
            )
        )
    return LambdaTrace(
        times=first.times,
        values=np.mean([trace.values for trace in traces], axis=0),
        method=first.method,
        replicate=AVERAGED,
        diagnostics=diagnostics,
    )


def pointwise_standard_error(traces: Sequence[LambdaTrace]) -> np.ndarray:
    """Standard error of the pointwise mean; zeros for a single trace."""
    stacked = np.array([trace.values for trace in traces], dtype=np.float64)
    if stacked.shape[0] < 2:
        return np.zeros(stacked.shape[1])
    return stacked.std(axis=0, ddof=1) / math.sqrt(stacked.shape[0])


def normalize_unit_interval(trace: LambdaTrace) -> LambdaTrace:
    low = float(trace.values.min())
    high = float(trace.values.max())
    if not high > low:
        raise DegenerateRangeError("cannot normalize a constant trace")
    return trace.with_values((trace.values - low) / (high - low), normalized=True)


def _levels(trace: LambdaTrace, change_point: int, settle: int) -> tuple[float, float]:
    settle = ensure_count(settle, "settle", minimum=1)
    change_point = ensure_count(change_point, "change_point")
    if change_point - settle < trace.start:
        raise InvalidInputError(
            f"pre-change window starts at {change_point - settle}, before the trace ({trace.start})"
        )
    if change_point + 2 * settle > trace.end:
        raise InvalidInputError(
            f"post-change window needs the trace to reach {change_point + 2 * settle}, "
            f"it ends at {trace.end}"
        )
    before = (trace.times >= change_point - settle) & (trace.times < change_point)
    after = trace.times >= change_point + settle
    return float(trace.values[before].mean()), float(trace.values[after].mean())


def relative_change(trace: LambdaTrace, change_point: int, settle: int) -> float:
    """lambda_2 / lambda_1.

    lambda_1 is the mean over [change_point - settle, change_point) and lambda_2
    the mean from change_point + settle to the end of the trace.
    """
    before, after = _levels(trace, change_point, settle)
    if before == 0.0:
        raise UndefinedRatioError("pre-change level is zero")
    return after / before


def adjustment_time(
    trace: LambdaTrace, change_point: int, settle: int, fraction: float = 0.9
) -> int | None:
    """Observations after the change point until ``fraction`` of the level shift is covered."""
    if not 0.0 < fraction <= 1.0:
        raise InvalidInputError(f"fraction must lie in (0, 1], got {fraction}")
    before, after = _levels(trace, change_point, settle)
    shift = after - before
    if shift == 0.0:
        return 0
    target = before + fraction * shift
    candidates = trace.times >= change_point
    moved = trace.values >= target if shift > 0 else trace.values <= target
    hits = np.flatnonzero(candidates & moved)
    if hits.size == 0:
        return None
    return int(trace.times[hits[0]]) - change_point


def apply_axis(spec: ScenarioSpec, axis: str, value: float) -> ScenarioSpec:
    """Spec with the post-change parameter named by ``axis`` set to ``value``."""
    schedule = spec.schedule
    if axis == "sigma2":
        schedule = replace(schedule, sigma_post=value)
    elif axis == "rho2":
        schedule = replace(schedule, rho_post=value)
    elif axis == "q2":
        schedule = replace(schedule, beta_post=ones_beta(spec.p, ensure_count(value, "q2")))
    else:
        raise InvalidInputError(f"unknown sweep axis '{axis}'; expected one of {SWEEP_AXES}")
    return replace(spec, schedule=schedule)


class _ReplicateTask(NamedTuple):
    spec: ScenarioSpec
    config: StreamConfig
    replicate: int


def _run_replicate(task: _ReplicateTask) -> LambdaTrace:
    return run_stream(generate(task.spec), task.config, replicate=task.replicate)


def run_replicates(
    spec: ScenarioSpec, config: StreamConfig, replicates: int, workers: int | None = 1
) -> list[LambdaTrace]:
    """Traces for replicate seeds spec.seed + k, k = 0 .. replicates-1."""
    replicates = ensure_count(replicates, "replicates", minimum=1)
    tasks = [_ReplicateTask(spec.with_replicate(k), config, k) for k in range(replicates)]
    return run_tasks(_run_replicate, tasks, workers)


def _cell(
    traces: Sequence[LambdaTrace],
    change_point: int,
    settle: int,
    value1: float,
    value2: float | None,
) -> GridCell:
    ratios = np.array([relative_change(trace, change_point, settle) for trace in traces])
    stderr = float(ratios.std(ddof=1) / math.sqrt(ratios.size)) if ratios.size > 1 else 0.0
    return GridCell(
        value1=value1,
        value2=value2,
        mean_ratio=relative_change(average_traces(traces), change_point, settle),
        stderr=stderr,
        replicates=len(traces),
    )


def _sweep(
    base: ScenarioSpec,
    combos: list[tuple[float, float | None]],
    axes: tuple[str, str | None],
    config: StreamConfig,
    replicates: int,
    settle: int | None,
    workers: int | None,
) -> list[GridCell]:
    replicates = ensure_count(replicates, "replicates", minimum=1)
    settle = config.window_length if settle is None else settle
    specs = []
    for value1, value2 in combos:
        spec = apply_axis(base, axes[0], value1)
        if axes[1] is not None and value2 is not None:
            spec = apply_axis(spec, axes[1], value2)
        specs.append(spec)

    # replicate k shares seed base + k across cells
    tasks = [
        _ReplicateTask(spec.with_replicate(k), config, k)
        for spec in specs
        for k in range(replicates)
    ]
    traces = run_tasks(_run_replicate, tasks, workers)

    cells = []
    for index, (value1, value2) in enumerate(combos):
        block = traces[index * replicates : (index + 1) * replicates]
        cells.append(_cell(block, base.change_point, settle, value1, value2))
        logger.info(
            "Sweep cell %s=%s %s=%s mean_ratio=%.4f",
            axes[0],
            value1,
            axes[1],
            value2,
            cells[-1].mean_ratio,
        )
    return cells


def sweep_single(
    base: ScenarioSpec,
    axis: str,
    values: Sequence[float],
    config: StreamConfig,
    replicates: int,
    *,
    settle: int | None = None,
    workers: int | None = 1,
) -> RelativeChangeGrid:
    if axis not in SWEEP_AXES:
        raise InvalidInputError(f"unknown sweep axis '{axis}'; expected one of {SWEEP_AXES}")
    combos = [(float(value), None) for value in values]
    cells = _sweep(base, combos, (axis, None), config, replicates, settle, workers)
    return RelativeChangeGrid(
        axis1=axis, values1=tuple(v for v, _ in combos), cells=tuple(cells), replicates=replicates
    )


def sweep_joint(
    base: ScenarioSpec,
    axis1: str,
    values1: Sequence[float],
    axis2: str,
    values2: Sequence[float],
    config: StreamConfig,
    replicates: int,
    *,
    settle: int | None = None,
    workers: int | None = 1,
) -> RelativeChangeGrid:
    """Full Cartesian grid; values1 is the outer (row) axis."""
    if frozenset({axis1, axis2}) not in JOINT_AXIS_PAIRS:
        raise InvalidInputError(f"unsupported axis pair ({axis1}, {axis2})")
    combos = [(float(v1), float(v2)) for v1 in values1 for v2 in values2]
    cells = _sweep(base, combos, (axis1, axis2), config, replicates, settle, workers)
    return RelativeChangeGrid(
        axis1=axis1,
        values1=tuple(float(v) for v in values1),
        axis2=axis2,
        values2=tuple(float(v) for v in values2),
        cells=tuple(cells),
        replicates=replicates,
    )


def run_preset(
    name: str,
    config: StreamConfig,
    replicates: int,
    *,
    seed: int = 0,
    settle: int | None = None,
    workers: int | None = 1,
) -> RelativeChangeGrid:
    try:
        preset = SWEEP_PRESETS[name]
    except KeyError as exc:
        raise InvalidInputError(
            f"unknown sweep preset '{name}'; expected one of {sorted(SWEEP_PRESETS)}"
        ) from exc
    base = preset.base_spec(seed)
    if preset.axis2 is None or preset.values2 is None:
        return sweep_single(
            base, preset.axis, preset.values, config, replicates, settle=settle, workers=workers
        )
    return sweep_joint(
        base,
        preset.axis,
        preset.values,
        preset.axis2,
        preset.values2,
        config,
        replicates,
        settle=settle,
        workers=workers,
    )
