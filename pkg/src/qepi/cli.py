"""Command-line entry point: ``qepi verify --config run.json`` and ``qepi list-checks``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

from . import checks
from .config import CHECKS, RunConfig, load
from .errors import BudgetExceeded, ConfigInvalid
from .report import VerificationReport

EXIT_OK = 0
EXIT_MARGIN_FAIL = 1
EXIT_DIAGNOSTIC = 2
EXIT_CONFIG = 64
EXIT_IO = 74

CHECK_DESCRIPTIONS = {
    "epi": "two-state entropy and entropy-power inequalities over an eta grid",
    "monotonicity": "entropy growth of repeated symmetric self-convolution",
    "debruijn": "entropy growth rate under the heat flow against KMB Fisher information",
    "fisher-stam": "subset entropy-power and Fisher information inequalities",
    "qc-epi": "subset inequalities with classical noise registers",
    "liftproof": "lifting-map identities and subset projector decomposition",
}

log = logging.getLogger("qepi")


def run(cfg: RunConfig, jobs: int = 1) -> VerificationReport:
    """Evaluate every task of ``cfg`` and collect the rows into a report."""
    todo = checks.tasks(cfg)
    todo.sort(key=checks.task_key)
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(checks.evaluate, todo, [cfg.data] * len(todo)))
    else:
        results = [checks.evaluate(t, cfg.data) for t in todo]
    rows = [row for rs in results for row in rs]
    return VerificationReport(rows, cfg.digest(), cfg["seed"])


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qepi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", help="run the checks of a configuration file")
    verify.add_argument("--config", required=True, help="JSON run configuration")
    verify.add_argument("--out-dir", default=".", help="directory for report.json and report.csv")
    verify.add_argument("--jobs", type=int, default=1, help="worker processes")
    verify.add_argument("--seed", type=int, default=None, help="override the configured seed")
    sub.add_parser("list-checks", help="print the available checks")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    if args.command == "list-checks":
        for name in CHECKS:
            print(f"{name:14s} {CHECK_DESCRIPTIONS[name]}")
        return EXIT_OK
    if args.jobs < 1:
        log.error("--jobs must be at least 1")
        return EXIT_CONFIG
    try:
        cfg = load(args.config, seed=args.seed)
        report = run(cfg, jobs=args.jobs)
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    except (ConfigInvalid, BudgetExceeded) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    try:
        json_path, csv_path = report.write(args.out_dir)
    except OSError as exc:
        log.error("cannot write report: %s", exc)
        return EXIT_IO
    s = report.summary
    log.info("%d rows: %d pass, %d fail, %d skip", s["total"], s["pass"], s["fail"], s["skip"])
    log.info("wrote %s and %s", json_path, csv_path)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
