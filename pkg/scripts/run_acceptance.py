"""Run the acceptance suite against the bundled configs and print a colored summary.

Usage: python scripts/run_acceptance.py [--seed 0xB1EF] [--workers 4] [--out-dir acceptance]
"""
import argparse
import filecmp
import itertools
import logging
import math
import sys
import time
from pathlib import Path
from typing import Callable, List, Tuple

from colorama import Fore, Style, init

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.config import Config, configure_logging  # noqa: E402
from src.experiments import RunOptions, load_config, run_pipeline, write_result  # noqa: E402
from src.normalization import LogType, TailScale, compute_h, forward_c_star, solve_q  # noqa: E402

init()

logger = logging.getLogger("acceptance")

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
ALPHA_GRID = (0.3, 0.5, 0.8, 1.2, 1.5, 1.9)
WEIGHT_GRID = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (0.5, 0.5), (0.1, 3.0))


def check_normalization(args) -> Tuple[bool, str]:
    worst_power = 0.0
    for t in (1.0, 5.0, 10.0):
        h = compute_h(1.0, TailScale(1.5, 1.0, 1.0), t)
        worst_power = max(worst_power, abs(h / math.exp(t / 1.5) - 1.0))
    scale = TailScale(1.5, 1.0, 1.0, LogType(1.0))
    worst_log = 0.0
    for t in (5.0, 10.0, 20.0):
        h = compute_h(1.0, scale, t)
        worst_log = max(worst_log, abs(math.exp(t + float(scale.log_g(h))) - 1.0))
    ok = worst_power <= 1e-12 and worst_log <= 1e-6
    return ok, f"pure power rel. error {worst_power:.2e}, log-type product error {worst_log:.2e}"


def check_q_solver(args) -> Tuple[bool, str]:
    worst = 0.0
    for alpha, (c1, c2) in itertools.product(ALPHA_GRID, WEIGHT_GRID):
        q1, q2 = solve_q(forward_c_star(c1, c2, alpha), alpha)
        worst = max(worst, abs(q1 - c1), abs(q2 - c2))
    exact = solve_q(complex(2.0 * math.pi, 0.7), 1.0) == (2.0, 2.0)
    return worst <= 1e-10 and exact, f"max round-trip error {worst:.2e}; alpha = 1 rule exact: {exact}"


def _pipeline(config_name: str, name: str, subdir: str = "") -> Callable:
    def check(args) -> Tuple[bool, str]:
        config = load_config(CONFIG_DIR / config_name)
        result, echo = run_pipeline(config, name, RunOptions(seed=args.seed, workers=args.workers))
        paths = write_result(result, args.out_dir / (subdir or Path(config_name).stem), echo)
        return result.passed, f"{name} on {config_name}: {result.verdict} ({paths['report']})"

    return check


def check_determinism(args) -> Tuple[bool, str]:
    config = load_config(CONFIG_DIR / "yule_stable15.yaml")
    paths = []
    for workers in (1, max(2, args.workers)):
        result, echo = run_pipeline(config, "verify-max", RunOptions(seed=args.seed, workers=workers))
        paths.append(write_result(result, args.out_dir / f"determinism-w{workers}", echo)["csv"])
    identical = filecmp.cmp(paths[0], paths[1], shallow=False)
    return identical, f"{paths[0]} and {paths[1]} {'are' if identical else 'are NOT'} byte-identical"


CRITERIA: List[Tuple[str, Callable]] = [
    ("1. normalization exactness", check_normalization),
    ("2. q-solver round trip", check_q_solver),
    ("3/9/10. stable tails, many-to-one, one large jump", _pipeline("yule_stable15.yaml", "diagnostics")),
    ("4. Yule cluster law", _pipeline("yule_stable15.yaml", "verify-cluster")),
    ("5/6. rightmost particles, alpha = 1.5", _pipeline("yule_stable15.yaml", "verify-max")),
    ("5/6. rightmost particles, alpha = 0.5", _pipeline("yule_stable05.yaml", "verify-max")),
    ("7. Laplace functional", _pipeline("yule_stable15.yaml", "verify-laplace")),
    ("8. limit sampler", _pipeline("yule_stable15.yaml", "limit")),
    ("11. front speed and bands", _pipeline("yule_stable15.yaml", "front")),
    ("12. determinism across worker counts", check_determinism),
]


def _seed(value: str) -> int:
    return int(value, 0)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=_seed, default=Config.DEFAULT_SEED)
    parser.add_argument("--workers", type=int, default=Config().WORKERS)
    parser.add_argument("--out-dir", type=Path, default=Path("acceptance"))
    parser.add_argument("--only", default=None, help="run only criteria whose label contains this text")
    args = parser.parse_args()
    configure_logging("WARNING")

    failures = 0
    for label, check in CRITERIA:
        if args.only and args.only not in label:
            continue
        print(f"{Fore.CYAN}{label}...{Style.RESET_ALL}")
        started = time.perf_counter()
        try:
            ok, detail = check(args)
        except Exception as e:
            logger.error(f"{label} raised: {str(e)}")
            ok, detail = False, f"error: {e}"
        elapsed = time.perf_counter() - started
        color = Fore.GREEN if ok else Fore.RED
        print(f"{color}{'PASS' if ok else 'FAIL'}{Style.RESET_ALL} {detail} [{elapsed:.1f}s]\n")
        failures += not ok

    summary = Fore.GREEN if failures == 0 else Fore.RED
    print(f"{summary}{failures} failing criteria{Style.RESET_ALL}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
