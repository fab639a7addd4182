"""Command line: ``memekf run | oracle | scenarios``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import MemEkfError
from .harness import ORACLE_TARGETS, RunConfig, run_campaign, run_oracle
from .scenarios import BUILTIN, dump_builtin


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memekf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo campaign")
    run.add_argument("--scenario", required=True, help="scenario JSON file or built-in name")
    run.add_argument("--tracker", default="mem-ekf-star",
                     help="comma-separated: mem-ekf-star[:variant], random-matrix")
    run.add_argument("--runs", type=int, default=1)
    run.add_argument("--seed", type=int, default=None, help="base seed (default: the scenario's)")
    run.add_argument("--out", required=True)
    run.add_argument("--diagnostics", action="store_true", help="write per-detection update records")

    orc = sub.add_parser("oracle", help="analytic moments vs Monte-Carlo estimates")
    orc.add_argument("--target", action="append", default=None,
                     help=f"one of {sorted(ORACLE_TARGETS)}; repeat or comma-separate")
    orc.add_argument("--samples", type=int, default=1_000_000)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--out", required=True)

    scen = sub.add_parser("scenarios", help="built-in scenarios")
    scen_sub = scen.add_subparsers(dest="action", required=True)
    scen_sub.add_parser("list")
    show = scen_sub.add_parser("show")
    show.add_argument("name", choices=sorted(BUILTIN))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "run":
            cfg = RunConfig(
                scenario=args.scenario,
                trackers=tuple(t.strip() for t in args.tracker.split(",") if t.strip()),
                runs=args.runs,
                seed=args.seed,
                out=args.out,
                diagnostics=args.diagnostics,
            )
            manifest = run_campaign(cfg)
            for tracker, info in manifest["trackers"].items():
                print(f"{tracker}: final RMGW {info['final_rmgw']:.4f}, mean RMGW {info['mean_rmgw']:.4f}")
        elif args.command == "oracle":
            targets = [t for arg in (args.target or []) for t in arg.split(",") if t]
            reports = run_oracle(targets, args.samples, args.seed, Path(args.out))
            for r in reports:
                print(f"{r.target}: relative error {r.rel_error:.4f} ({r.samples} samples)")
        elif args.action == "list":
            for name, doc in BUILTIN.items():
                print(f"{name}\t{doc['kind']}")
        else:
            sys.stdout.write(dump_builtin(args.name))
    except (MemEkfError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
