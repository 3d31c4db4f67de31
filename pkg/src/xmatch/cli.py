"""``xmatch`` command line.

Exit status: 0 when everything passes, 1 when a check fails, 2 on usage
or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .bench import ALGORITHMS, run_bench
from .engine import max_fair_matching, um_star, uniform_star
from .io import InstanceSpec, ParseError, gen_instance, parse_orders, read_matching, write_matching, write_orders
from .orders import OrderBookError
from .verification import (
    VerificationReport,
    certified_upper_bound,
    check_fair,
    check_uniform,
    check_valid,
    element_distinctness,
)

CHECKS = ("valid", "fair", "uniform", "bound")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _csv_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None
    if any(n < 0 for n in sizes):
        raise argparse.ArgumentTypeError("sizes must be natural numbers")
    return sizes


def cmd_match(args) -> int:
    book = parse_orders(args.input, args.format)
    if args.mode == "max":
        m = max_fair_matching(book)
    elif args.algo == "sort":
        m = um_star(book)
    else:
        m = uniform_star(book)
    write_matching(m, args.output, args.format, book=book)
    print(f"{len(m)} transactions, volume {m.volume}", file=sys.stderr)
    return EXIT_OK


def bound_report(m, book) -> VerificationReport:
    report = VerificationReport("bound")
    bound, price = certified_upper_bound(book)
    if m.volume > bound:
        report.add("volume-above-bound", f"volume {m.volume} exceeds demand-supply bound {bound} at price {price}")
    return report


def cmd_verify(args) -> int:
    checks = _csv_list(args.checks)
    unknown = set(checks) - set(CHECKS)
    if unknown:
        print(f"xmatch verify: unknown checks {sorted(unknown)}; choose from {','.join(CHECKS)}", file=sys.stderr)
        return EXIT_USAGE
    book = parse_orders(args.orders, args.format)
    m = read_matching(args.matching, args.format)
    reports = []
    for name in checks:
        if name == "valid":
            reports.append(check_valid(m, book))
        elif name == "fair":
            reports.append(check_fair(m, book))
        elif name == "uniform":
            reports.append(check_uniform(m))
        else:
            reports.append(bound_report(m, book))
    if args.json:
        print(json.dumps([r.to_dict() for r in reports], indent=1))
    else:
        for r in reports:
            print(r)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_bench(args) -> int:
    algos = _csv_list(args.algos)
    unknown = set(algos) - ALGORITHMS.keys()
    if unknown:
        print(f"xmatch bench: unknown algorithms {sorted(unknown)}", file=sys.stderr)
        return EXIT_USAGE
    template = InstanceSpec(0, 0, args.price_low, args.price_high, args.qty_low, args.qty_high, args.seed)
    records = run_bench(args.sizes, template, algos, repeats=args.repeats, log=lambda s: print(s, file=sys.stderr))
    rows = [r.to_dict() for r in records]
    if args.out is None:
        print(json.dumps(rows, indent=1))
    elif Path(args.out).suffix.lower() == ".json":
        Path(args.out).write_text(json.dumps(rows, indent=1) + "\n")
    else:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("algorithm", "n", "wall_time", "volume"))
            writer.writerows((r.algorithm, r.n, f"{r.wall_time:.6f}", r.volume) for r in records)
    return EXIT_OK


def cmd_distinct(args) -> int:
    xs = []
    with open(args.input) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                xs.append(int(line))
            except ValueError:
                raise ParseError(args.input, lineno, f"not an integer: {line!r}") from None
    try:
        distinct = element_distinctness(xs)
    except ValueError as exc:
        raise ParseError(args.input, None, str(exc)) from None
    print("distinct" if distinct else "repeated")
    return EXIT_OK if distinct else EXIT_FAIL


def cmd_gen(args) -> int:
    spec = InstanceSpec(args.bids, args.asks, args.price_low, args.price_high, args.qty_low, args.qty_high, args.seed)
    write_orders(gen_instance(spec), args.output, args.format)
    return EXIT_OK


def _add_ranges(p: argparse.ArgumentParser, price_high: int, qty_high: int) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--price-low", type=int, default=1)
    p.add_argument("--price-high", type=int, default=price_high)
    p.add_argument("--qty-low", type=int, default=1)
    p.add_argument("--qty-high", type=int, default=qty_high)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xmatch", description="Call-auction matching engine.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = dict(choices=("csv", "json"), default=None, help="file format (default: from extension)")

    p = sub.add_parser("match", help="match an order file")
    p.add_argument("--mode", choices=("uniform", "max"), default="uniform")
    p.add_argument("--algo", choices=("linear", "sort"), default="linear",
                   help="uniform mode only: linear-time bisection or sort-and-match")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("verify", help="check a matching against its order file")
    p.add_argument("--orders", required=True)
    p.add_argument("--matching", required=True)
    p.add_argument("--checks", default=",".join(CHECKS))
    p.add_argument("--format", **fmt)
    p.add_argument("--json", action="store_true", help="print machine-readable reports")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time matchers on random books")
    p.add_argument("--sizes", type=_sizes, required=True, help="comma-separated total order counts")
    p.add_argument("--algos", default="uniform_star,um_star")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out")
    _add_ranges(p, 1_000_000, 100)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("distinct", help="element distinctness through maximum matching")
    p.add_argument("--input", required=True, help="one integer per line, each in [1, n]")
    p.set_defaults(func=cmd_distinct)

    p = sub.add_parser("gen", help="write a random order file")
    p.add_argument("--bids", type=int, required=True)
    p.add_argument("--asks", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", **fmt)
    _add_ranges(p, 100, 10)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, OrderBookError, OSError, ValueError) as exc:
        print(f"xmatch {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
