"""Run the bundled .chc benchmarks (or given files) and print one summary row each.

    python scripts/run_benchmarks.py
    python scripts/run_benchmarks.py --penalty 0 0.05 --max-rounds 300 my.chc
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from hornice.driver import RunConfig, run
from hornice.frontend import parse_file


def bundled() -> list[Path]:
    root = resources.files("hornice.benchmarks")
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".chc"))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("files", nargs="*", type=Path)
    ap.add_argument("--bound", type=int, default=16)
    ap.add_argument("--max-rounds", type=int, default=500)
    ap.add_argument("--penalty", type=float, nargs="+", default=[0.0])
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--json", action="store_true", help="emit JSON lines instead of a table")
    args = ap.parse_args(argv)

    files = args.files or bundled()
    if not args.json:
        print(f"{'benchmark':<22} {'penalty':>7} {'status':<15} {'rounds':>6} {'pos':>4} {'neg':>4} "
              f"{'horn':>5} {'stage':>5} {'seconds':>8}")
    for path in files:
        system = parse_file(path)
        for pen in args.penalty:
            cfg = RunConfig(bound=args.bound, max_rounds=args.max_rounds, penalty=pen, seed=args.seed)
            out = run(system, cfg)
            row = {"benchmark": path.stem, "penalty": pen, "status": out.status, "rounds": out.rounds,
                   "pos": out.pos, "neg": out.neg, "horn": out.horn, "stage": out.stage,
                   "seconds": round(out.seconds, 2), "conjecture": out.describe(system)}
            if args.json:
                print(json.dumps(row), flush=True)
            else:
                print(f"{row['benchmark']:<22} {pen:>7g} {out.status:<15} {out.rounds:>6} {out.pos:>4} "
                      f"{out.neg:>4} {out.horn:>5} {out.stage:>5} {out.seconds:>8.2f}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
