"""Command-line entry point: ``python -m src.cli <subcommand> <config.yaml> [flags]``.

Exit codes: 0 when every statistical check passes, 2 when a check fails,
1 on any error (invalid config, failed pipeline).
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .config import Config, configure_logging
from .errors import ConfigError, LabError
from .experiments import SUBCOMMANDS, ExperimentRunner, RunOptions, load_config, write_result

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2


def _seed(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {value}")
    return seed


def _t_grid(value: str) -> List[float]:
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"t grid must be comma-separated numbers, got {value!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="branching-lab",
        description="Monte Carlo checks for heavy-tailed branching Levy processes",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("config", type=Path, help="YAML experiment config")
    parser.add_argument("--seed", type=_seed, default=Config.DEFAULT_SEED, help="64-bit master seed (default 0xB1EF)")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for replication fan-out")
    parser.add_argument("--out-dir", type=Path, default=Path("results"), help="directory for CSV and report files")
    parser.add_argument("--replications", type=int, default=None, help="override experiment.replications")
    parser.add_argument("--t-grid", type=_t_grid, default=None, help="override experiment.t_grid, e.g. 4,6,8")
    parser.add_argument("--log-level", default="INFO")
    parser.add_argument("--log-json", action="store_true", help="emit JSON log records")
    return parser


def run(
    config_path: Path,
    subcommand: str,
    seed: int = Config.DEFAULT_SEED,
    workers: int = 1,
    out_dir: Path = Path("results"),
    replications: Optional[int] = None,
    t_grid: Optional[List[float]] = None,
) -> int:
    try:
        config = load_config(config_path).with_overrides(replications=replications, t_grid=t_grid)
        runner = ExperimentRunner(config, RunOptions(seed=seed, workers=workers))
        result = runner.run(subcommand)
        paths = write_result(result, out_dir, runner.echo())
    except ConfigError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except LabError as e:
        logger.error(f"Run failed: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    print(result.report_text(), end="")
    if not result.passed:
        print(f"statistical check failed; report: {paths['report']}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_json)
    return run(
        args.config,
        args.subcommand,
        seed=args.seed,
        workers=args.workers,
        out_dir=args.out_dir,
        replications=args.replications,
        t_grid=args.t_grid,
    )


if __name__ == "__main__":
    sys.exit(main())
