"""Command-line entry point: ``simulate``, ``sweep`` and ``stream`` runs driven by a flat config.

Config files hold one ``key = value`` per line (``#`` starts a comment line);
a ``manifest.json`` from an earlier run is accepted in place of a config file.
Command-line flags override file values. Keys:

  scenario   n, p, change_point, sigma1, sigma2, rho1, rho2, q1, q2,
             beta1, beta2 (comma lists), seed
  stream     method (bic|gcv|rap), window, burn_in, weighting
             (rectangular|exponential), window_forgetting, grid_size,
             grid_min_ratio, forgetting, step_size, lambda_floor, log_space,
             tol, max_iter
  run        replicates, threads, settle, xlsx
  sweep      axis (preset sigma|q|rho|q_sigma|rho_sigma|q_rho, or sigma2|q2|rho2),
             values, axis2, values2
  data       data, delimiter, header, missing (strict|drop_row|forward_fill),
             time_column, log_returns

Exit status: 0 on success, 2 for configuration errors, 1 for any other failure.
Failures print one JSON record to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from app.use_case_support import RunOutcome
from app.use_cases import RunSweep, SimulateScenario, StreamSeries
from config import DEFAULT_OUTPUT_DIR
from domain.errors import ConfigError, DomainError
from infrastructure.result_store import ResultStore
from services.config_parser import merge_config, read_config_file
from version import __version__

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def configure_logging(level: str) -> None:
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)


def _common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value file or a previous manifest.json")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="base seed; replicate k uses seed + k")
    parser.add_argument("--replicates", type=int)
    parser.add_argument("--method", choices=["bic", "gcv", "rap"])
    parser.add_argument("--window", type=int, help="sliding window length")
    parser.add_argument("--burn-in", dest="burn_in", type=int)
    parser.add_argument("--threads", type=int, help="worker processes (0 = all cores)")
    parser.add_argument("--xlsx", action="store_const", const=True, help="also write results.xlsx")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-tracker",
        description="Track the Lasso regularization parameter over streaming data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser("simulate", help="stream one synthetic scenario")
    _common_arguments(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    sweep = subparsers.add_parser("sweep", help="relative change of lambda over a parameter grid")
    _common_arguments(sweep)
    sweep.add_argument("--axis", help="preset name or sigma2|q2|rho2")
    sweep.add_argument("--values", help="comma-separated values for --axis")
    sweep.add_argument("--axis2")
    sweep.add_argument("--values2")
    sweep.add_argument("--settle", type=int)
    sweep.set_defaults(handler=cmd_sweep)

    stream = subparsers.add_parser("stream", help="node-wise traces for a delimited data file")
    _common_arguments(stream)
    stream.add_argument("--data", help="CSV/TSV file with one column per node")
    stream.add_argument("--delimiter", help="single character, or 'tab'")
    stream.add_argument("--missing", choices=["strict", "drop_row", "forward_fill"])
    stream.add_argument("--no-header", dest="header", action="store_const", const=False)
    stream.add_argument("--time-column", dest="time_column")
    stream.add_argument("--log-returns", dest="log_returns", action="store_const", const=True)
    stream.set_defaults(handler=cmd_stream)
    return parser


_OVERRIDE_FLAGS = (
    "seed",
    "replicates",
    "method",
    "window",
    "burn_in",
    "threads",
    "xlsx",
    "axis",
    "values",
    "axis2",
    "values2",
    "settle",
    "data",
    "delimiter",
    "missing",
    "header",
    "time_column",
    "log_returns",
)


def resolve_config(args: argparse.Namespace) -> dict[str, str]:
    base = read_config_file(args.config) if args.config else {}
    overrides = {name: getattr(args, name, None) for name in _OVERRIDE_FLAGS}
    return merge_config(base, overrides)


def _error_record(command: str, exc: BaseException, path: str | None) -> dict[str, Any]:
    return {
        "status": "error",
        "command": command,
        "error": type(exc).__name__,
        "message": str(exc),
        "path": getattr(exc, "filename", None) or path,
    }


def _run(
    args: argparse.Namespace,
    use_case: Callable[[ResultStore], Any],
) -> int:
    command = args.command
    out_dir = Path(args.out) if args.out else Path(DEFAULT_OUTPUT_DIR) / command
    try:
        config = resolve_config(args)
        outcome: RunOutcome = use_case(ResultStore(out_dir)).execute(config)
    except ConfigError as exc:
        logger.error("Invalid configuration for %s: %s", command, exc)
        print(json.dumps(_error_record(command, exc, args.config)), file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, OSError, ValueError) as exc:
        logger.error("Run failed command=%s error=%s", command, exc)
        path = getattr(args, "data", None) or args.config
        print(json.dumps(_error_record(command, exc, path)), file=sys.stderr)
        return EXIT_FAILURE

    print(outcome.summary)
    print(f"Wrote {len(outcome.files)} files to {outcome.out_dir}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    return _run(args, SimulateScenario)


def cmd_sweep(args: argparse.Namespace) -> int:
    return _run(args, RunSweep)


def cmd_stream(args: argparse.Namespace) -> int:
    return _run(args, StreamSeries)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
