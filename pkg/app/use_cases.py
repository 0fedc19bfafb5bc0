import logging
from collections.abc import Mapping
from functools import partial

from app.use_case_support import (
    RunOutcome,
    config_count,
    config_workers,
    node_file_names,
    resolved_config,
    wants_xlsx,
    write_outputs,
)
from config import DEFAULT_REPLICATES
from domain.errors import ConfigError
from domain.policies import MissingValuePolicy
from domain.reports import grid_table, trace_summary_table
from infrastructure.result_store import ResultStore
from services.config_parser import (
    DATA_KEYS,
    SWEEP_KEYS,
    build_stream_config,
    parse_choice,
    parse_flag,
    parse_float_list,
)
from services.data_io import load_csv, nodewise_stream
from services.harness import (
    JOINT_AXIS_PAIRS,
    SWEEP_AXES,
    SWEEP_PRESETS,
    average_traces,
    run_replicates,
    sweep_joint,
    sweep_single,
)
from services.scenarios import scenario_from_config
from utils.csv_utils import export_grid_to_csv, export_traces_to_csv
from utils.tabular_utils import (
    GRID_HEADERS,
    TRACE_HEADERS,
    grid_export_rows,
    trace_export_rows,
    traces_export_rows,
)

logger = logging.getLogger(__name__)

TRACES_NAME = "traces.csv"
AVERAGED_NAME = "averaged.csv"
GRID_NAME = "grid.csv"
AVERAGED_NORMALIZED_NAME = "averaged_normalized.csv"
DELIMITER_ALIASES = {"tab": "\t", "\\t": "\t", "comma": ",", "semicolon": ";", "pipe": "|"}


class SimulateScenario:
    """Generate one scenario, stream it for every replicate and export the traces."""

    def __init__(self, store: ResultStore):
        self._store = store

    def execute(self, config: Mapping[str, str]) -> RunOutcome:
        spec = scenario_from_config(config)
        stream_config = build_stream_config(config)
        replicates = config_count(config, "replicates", 1, minimum=1)
        traces = run_replicates(spec, stream_config, replicates, config_workers(config))
        averaged = average_traces(traces)

        resolved = resolved_config(
            config,
            spec=spec,
            extra_keys=("replicates", "xlsx"),
            extra_defaults={"replicates": "1"},
        )
        xlsx = None
        if wants_xlsx(config):
            xlsx = {
                "traces": (TRACE_HEADERS, traces_export_rows(traces)),
                "averaged": (TRACE_HEADERS, trace_export_rows(averaged)),
            }
        files, manifest = write_outputs(
            self._store,
            command="simulate",
            config=resolved,
            seeds=[spec.seed + k for k in range(replicates)],
            writers={
                TRACES_NAME: partial(export_traces_to_csv, traces),
                AVERAGED_NAME: partial(export_traces_to_csv, [averaged]),
            },
            xlsx_tables=xlsx,
        )
        logger.info(
            "Simulation finished method=%s replicates=%s points=%s",
            stream_config.method,
            replicates,
            len(averaged),
        )
        summary = trace_summary_table([*traces, averaged])
        return RunOutcome(self._store.out_dir, files, summary, manifest)


class RunSweep:
    """Relative-change grid over one or two post-change parameters."""

    def __init__(self, store: ResultStore):
        self._store = store

    @staticmethod
    def _axes(config: Mapping[str, str]) -> tuple[dict[str, str], dict[str, str]]:
        """Resolve a preset name or explicit axes into axis/values entries."""
        axis = (config.get("axis") or "").strip()
        if not axis:
            raise ConfigError("sweep needs 'axis' (a preset or one of sigma2, q2, rho2)")
        scenario = dict(config)
        sweep: dict[str, str] = {}
        preset = SWEEP_PRESETS.get(axis)
        if preset is not None:
            sweep["axis"] = preset.axis
            sweep["values"] = ",".join(str(v) for v in preset.values)
            if preset.axis2 is not None and preset.values2 is not None:
                sweep["axis2"] = preset.axis2
                sweep["values2"] = ",".join(str(v) for v in preset.values2)
            if preset.rho1 is not None and not config.get("rho1"):
                scenario["rho1"] = repr(preset.rho1)
        else:
            sweep["axis"] = axis
            if config.get("axis2"):
                sweep["axis2"] = config["axis2"].strip()
        for key in ("values", "values2"):
            if config.get(key):
                sweep[key] = config[key]

        if sweep["axis"] not in SWEEP_AXES:
            raise ConfigError(
                f"unknown sweep axis '{axis}'; expected a preset {sorted(SWEEP_PRESETS)} "
                f"or one of {list(SWEEP_AXES)}"
            )
        if "values" not in sweep:
            raise ConfigError(f"sweep over '{axis}' needs 'values'")
        if "axis2" in sweep:
            if frozenset({sweep["axis"], sweep["axis2"]}) not in JOINT_AXIS_PAIRS:
                raise ConfigError(f"unsupported axis pair ({sweep['axis']}, {sweep['axis2']})")
            if "values2" not in sweep:
                raise ConfigError(f"sweep over '{sweep['axis2']}' needs 'values2'")
        return scenario, sweep

    def execute(self, config: Mapping[str, str]) -> RunOutcome:
        scenario, sweep = self._axes(config)
        base = scenario_from_config(scenario)
        stream_config = build_stream_config(config)
        replicates = config_count(config, "replicates", DEFAULT_REPLICATES, minimum=1)
        settle = (
            config_count(config, "settle", stream_config.window_length, minimum=1)
            if config.get("settle")
            else None
        )
        workers = config_workers(config)
        values = parse_float_list(sweep["values"], "values")
        if "axis2" in sweep:
            grid = sweep_joint(
                base,
                sweep["axis"],
                values,
                sweep["axis2"],
                parse_float_list(sweep["values2"], "values2"),
                stream_config,
                replicates,
                settle=settle,
                workers=workers,
            )
        else:
            grid = sweep_single(
                base,
                sweep["axis"],
                values,
                stream_config,
                replicates,
                settle=settle,
                workers=workers,
            )

        resolved = resolved_config(
            {**config, **sweep},
            spec=base,
            extra_keys=("replicates", "settle", "xlsx", *SWEEP_KEYS),
            extra_defaults={
                "replicates": str(DEFAULT_REPLICATES),
                "settle": str(stream_config.window_length),
            },
        )
        xlsx = {"grid": (GRID_HEADERS, grid_export_rows(grid))} if wants_xlsx(config) else None
        files, manifest = write_outputs(
            self._store,
            command="sweep",
            config=resolved,
            seeds=[base.seed + k for k in range(replicates)],
            writers={GRID_NAME: partial(export_grid_to_csv, grid)},
            xlsx_tables=xlsx,
        )
        logger.info(
            "Sweep finished axis1=%s axis2=%s cells=%s replicates=%s",
            grid.axis1,
            grid.axis2,
            len(grid.cells),
            replicates,
        )
        return RunOutcome(self._store.out_dir, files, grid_table(grid), manifest)


class StreamSeries:
    """Node-wise lambda traces for a multivariate series read from a delimited file."""

    def __init__(self, store: ResultStore):
        self._store = store

    @staticmethod
    def _delimiter(config: Mapping[str, str]) -> str:
        raw = config.get("delimiter") or ","
        return DELIMITER_ALIASES.get(raw.lower(), raw)

    def execute(self, config: Mapping[str, str]) -> RunOutcome:
        path = config.get("data")
        if not path:
            raise ConfigError("stream needs 'data' (path to a delimited file)")
        stream_config = build_stream_config(config)
        missing = parse_choice(
            config.get("missing") or MissingValuePolicy.STRICT.value, "missing", MissingValuePolicy
        )
        series = load_csv(
            path,
            delimiter=self._delimiter(config),
            header=parse_flag(config.get("header") or "true", "header"),
            missing=missing,
            time_column=config.get("time_column") or None,
            log_returns=parse_flag(config.get("log_returns") or "false", "log_returns"),
        )
        result = nodewise_stream(series, stream_config, workers=config_workers(config))

        names = node_file_names(result.labels)
        writers = {
            name: partial(export_traces_to_csv, [trace], node=label)
            for name, label, trace in zip(names, result.labels, result.per_node, strict=True)
        }
        writers[AVERAGED_NORMALIZED_NAME] = partial(
            export_traces_to_csv, [result.averaged_normalized], node="averaged"
        )
        xlsx = None
        if wants_xlsx(config):
            node_rows = []
            for label, trace in zip(result.labels, result.per_node, strict=True):
                node_rows.extend(trace_export_rows(trace, node=label))
            xlsx = {
                "nodes": (TRACE_HEADERS, node_rows),
                "averaged_normalized": (
                    TRACE_HEADERS,
                    trace_export_rows(result.averaged_normalized, node="averaged"),
                ),
            }
        resolved = resolved_config(
            config,
            extra_keys=(*DATA_KEYS, "xlsx"),
            extra_defaults={"header": "true", "missing": missing.value, "log_returns": "false"},
        )
        files, manifest = write_outputs(
            self._store,
            command="stream",
            config=resolved,
            seeds=[],
            writers=writers,
            xlsx_tables=xlsx,
        )
        summary = trace_summary_table(
            [*result.per_node, result.averaged_normalized], [*result.labels, "averaged"]
        )
        return RunOutcome(self._store.out_dir, files, summary, manifest)
