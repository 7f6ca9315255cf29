"""Command line entry point: ``hornice verify FILE.chc``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .driver import GAVE_UP, POOL_EXHAUSTED, PROVED, InternalError, RunConfig, run
from .frontend import ParseError, parse_file
from .learner import jsonl_writer

EXIT_CODES = {PROVED: 0, GAVE_UP: 1, POOL_EXHAUSTED: 2}
EXIT_PARSE = 3
EXIT_INTERNAL = 4


def _stages(text: str) -> tuple[int, ...]:
    try:
        caps = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")
    if not caps or any(c < 1 for c in caps):
        raise argparse.ArgumentTypeError("pool stages must be positive integers")
    return caps


class _Parser(argparse.ArgumentParser):
    # usage errors share the input-error exit code instead of argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hornice", description="Horn-ICE invariant synthesis")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", help="synthesize invariants for a CHC file")
    v.add_argument("file", help="input .chc file")
    v.add_argument("--bound", type=int, default=16, help="teacher box bound B (default 16)")
    v.add_argument("--max-rounds", type=int, default=2000)
    v.add_argument("--pool-stage", type=_stages, default=(8, 64, 512),
                   help="threshold caps per stage, e.g. 8,64,512")
    v.add_argument("--penalty", type=float, default=0.0,
                   help="weight of the cut-constraint penalty in split scores (default 0)")
    v.add_argument("--seed", type=int, default=None, help="randomize teacher witnesses")
    v.add_argument("--trace", default=None, help="write per-round JSON lines to PATH")
    v.add_argument("--format", choices=("text", "structured"), default="text")
    return parser


def _setup_logging() -> None:
    level = os.environ.get("HORNICE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _report(outcome, system, fmt: str) -> str:
    formulas = outcome.describe(system)
    arity = system.max_arity
    if fmt == "structured":
        return json.dumps({
            "status": outcome.status,
            "rounds": outcome.rounds,
            "pos": outcome.pos,
            "neg": outcome.neg,
            "horn": outcome.horn,
            "seconds": round(outcome.seconds, 3),
            "stage": outcome.stage,
            "bound": outcome.bound,
            "conjecture": formulas or None,
        }, indent=2)
    lines = [f"status: {outcome.status}",
             f"rounds: {outcome.rounds} (pos {outcome.pos}, neg {outcome.neg}, horn {outcome.horn})",
             f"time: {outcome.seconds:.2f}s"]
    if outcome.status == PROVED:
        b = outcome.bound
        lines.append(f"valid for all values in [-{b},{b}]^{arity}" if arity else "valid")
        lines += [f"  {name}: {f}" for name, f in formulas.items()]
    return "\n".join(lines)


def verify(args) -> int:
    try:
        system = parse_file(args.file)
    except ParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"{args.file}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        cfg = RunConfig(bound=args.bound, max_rounds=args.max_rounds, pool_stages=args.pool_stage,
                        penalty=args.penalty, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    trace_file = open(args.trace, "w") if args.trace else None
    if trace_file:
        cfg.trace = jsonl_writer(trace_file)
    try:
        outcome = run(system, cfg)
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        if trace_file:
            trace_file.close()
    print(_report(outcome, system, args.format))
    return EXIT_CODES[outcome.status]


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return verify(args)
    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
