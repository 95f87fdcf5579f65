"""Command-line front end.

Subcommands: compute, table, bounds, check, oracle, demo.  Results go to
stdout (text, json, or csv), diagnostics to stderr.  Exit codes: 0 on
success, 2 on usage errors, 3 on computation failures.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
import time

from . import hp
from .errors import CapExceededError, DomainError, ThresholdError
from .optimizer import compute_threshold
from .oracle import brute_force_threshold
from .orthopoly import laguerre_smallest_zero
from .validate import (
    MetzlerSystem,
    StabilityPolynomial,
    check_abs_monotonic,
    check_order,
    contractivity_demo,
    positivity_demo,
)

USAGE_ERROR = 2
COMPUTE_ERROR = 3


def _record(request: dict, result: dict, t0: float, precision_bits: int,
            configuration) -> dict:
    return {
        "request": request,
        "result": result,
        "timing_ms": round(1000 * (time.perf_counter() - t0), 3),
        "precision_bits": precision_bits,
        "configuration": list(configuration) if configuration is not None else None,
    }


def _render_value(result, digits: int) -> str:
    safe = min(int(digits), result.enclosure.guaranteed_decimals())
    return hp.truncate_decimals(result.r_value, safe)


def _print_threshold_text(result, digits: int, exact: bool) -> None:
    print(f"R({result.m},{result.n}) = {_render_value(result, digits)}")
    print(f"exponents: {' '.join(str(e) for e in result.exponents)}")
    with hp.precision(result.precision_bits):
        alphas = " ".join(hp.decimal_str(a, max(digits, 6)) for a in result.alphas)
    print(f"coefficients: {alphas}")
    if result.configuration is not None:
        print(f"configuration: {result.configuration.entries}")
    print(f"derivation: {result.derivation}")
    if exact:
        print(f"defining polynomial: {result.defining_poly.format()}")
        print(
            "enclosure: "
            f"[{result.enclosure.lo.numerator}/{result.enclosure.lo.denominator}, "
            f"{result.enclosure.hi.numerator}/{result.enclosure.hi.denominator}]"
        )


def cmd_compute(args) -> int:
    t0 = time.perf_counter()
    try:
        result = compute_threshold(
            args.m, args.n,
            precision_bits=args.precision_bits,
            config_order=args.config_order,
            seed=args.seed,
            jobs=args.jobs,
        )
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ThresholdError as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return COMPUTE_ERROR
    if args.format == "json":
        payload = result.to_json()
        if not args.exact:
            payload.pop("defining_poly")
            payload.pop("enclosure")
        rec = _record(
            {"command": "compute", "m": args.m, "n": args.n,
             "exact": bool(args.exact), "digits": args.digits},
            {"kind": "threshold", **payload},
            t0, result.precision_bits,
            result.configuration.entries if result.configuration else None,
        )
        print(json.dumps(rec))
    else:
        _print_threshold_text(result, args.digits, args.exact)
    return 0


def _parse_int_list(spec: str) -> list:
    out = []
    for part in spec.split(","):
        part = part.strip()
        if ":" in part:
            pieces = [int(x) for x in part.split(":")]
            if len(pieces) == 2:
                lo, hi, step = pieces[0], pieces[1], 1
            elif len(pieces) == 3:
                lo, hi, step = pieces
            else:
                raise ValueError(f"bad range {part!r}")
            out.extend(range(lo, hi + 1, step))
        else:
            out.append(int(part))
    return out


def cmd_table(args) -> int:
    t0 = time.perf_counter()
    try:
        ms = _parse_int_list(args.m)
        ns = _parse_int_list(args.n)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    jobs = [(m, n) for n in ns for m in sorted(ms) if m >= n]
    failures = []
    values = {}
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futs = {
                pool.submit(_table_cell, m, n, args.precision_bits): (m, n)
                for (m, n) in jobs
            }
            for fut in concurrent.futures.as_completed(futs):
                m, n = futs[fut]
                values[(m, n)] = fut.result()
    else:
        # sweep each order with warm starts from the previous degree
        for n in ns:
            warm = None
            for m in sorted(ms):
                if m < n:
                    continue
                try:
                    r = compute_threshold(m, n, precision_bits=args.precision_bits,
                                          warm_start=warm)
                    warm = r.enclosure.lo
                    values[(m, n)] = r
                except ThresholdError as exc:
                    values[(m, n)] = f"{type(exc).__name__}: {exc}"
                    warm = None
    for key, val in values.items():
        if isinstance(val, str):
            failures.append((key, val))
            print(f"cell {key}: {val}", file=sys.stderr)

    def cell_text(m, n):
        if m < n:
            return "--"
        v = values[(m, n)]
        if isinstance(v, str):
            return "ERR"
        return _render_value(v, args.digits)

    if args.format == "json":
        cells = []
        for m in sorted(ms):
            for n in ns:
                cells.append({"m": m, "n": n, "value": cell_text(m, n)})
        rec = _record(
            {"command": "table", "m": args.m, "n": args.n, "digits": args.digits},
            {"kind": "table", "cells": cells},
            t0, args.precision_bits, None,
        )
        print(json.dumps(rec))
    else:
        sep = "," if args.format == "csv" else "  "
        widths = 10 if args.format == "text" else 0
        header = sep.join(["m"] + [str(n) for n in ns])
        print(header)
        for m in sorted(ms):
            row = [str(m)] + [cell_text(m, n) for n in ns]
            if args.format == "text":
                print(sep.join(x.rjust(widths) if i else x.ljust(4)
                               for i, x in enumerate(row)))
            else:
                print(sep.join(row))
    return COMPUTE_ERROR if failures else 0


def _table_cell(m, n, precision_bits):
    # errors travel back across the process pool as plain strings
    try:
        return compute_threshold(m, n, precision_bits=precision_bits)
    except ThresholdError as exc:
        return f"{type(exc).__name__}: {exc}"


def cmd_bounds(args) -> int:
    t0 = time.perf_counter()
    if args.n % 2 == 0:
        print(
            "usage error: bounds apply to odd orders; "
            f"use the reduction R({args.m},{args.n}) = R({args.m - 1},{args.n - 1})",
            file=sys.stderr,
        )
        return USAGE_ERROR
    if args.m < args.n or args.n < 1:
        print(f"usage error: need m >= n >= 1, got ({args.m}, {args.n})",
              file=sys.stderr)
        return USAGE_ERROR
    p = (args.n + 1) // 2
    with hp.precision(args.precision_bits):
        lower = laguerre_smallest_zero(p, args.m - 2 * p + 1)
        upper = laguerre_smallest_zero(p, args.m - p)
        lo_s = hp.truncate_decimals(lower, args.digits)
        hi_s = hp.truncate_decimals(upper, args.digits)
    if args.format == "json":
        rec = _record(
            {"command": "bounds", "m": args.m, "n": args.n, "digits": args.digits},
            {"kind": "bounds", "lower": lo_s, "upper": hi_s},
            t0, args.precision_bits, None,
        )
        print(json.dumps(rec))
    else:
        print(f"{lo_s} <= R({args.m},{args.n}) <= {hi_s}")
    return 0


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    try:
        slow = brute_force_threshold(args.m, args.n, precision_bits=args.precision_bits)
    except CapExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    fast = compute_threshold(args.m, args.n, precision_bits=args.precision_bits)
    with hp.precision(max(args.precision_bits, 100)):
        diff = abs(fast.r_value - slow.r_value)
        diff_s = hp.decimal_str(diff, 3)
    agree = diff < 1e-9
    if args.format == "json":
        rec = _record(
            {"command": "check", "m": args.m, "n": args.n},
            {
                "kind": "check",
                "fast": hp.decimal_str(fast.r_value),
                "oracle": hp.decimal_str(slow.r_value),
                "difference": diff_s,
                "agree": bool(agree),
            },
            t0, args.precision_bits,
            fast.configuration.entries if fast.configuration else None,
        )
        print(json.dumps(rec))
    else:
        print(f"fast   R({args.m},{args.n}) = {_render_value(fast, args.digits)}")
        print(f"oracle R({args.m},{args.n}) = {_render_value(slow, args.digits)}")
        print(f"difference: {diff_s}  ({'agree' if agree else 'DISAGREE'})")
    return 0 if agree else COMPUTE_ERROR


def cmd_oracle(args) -> int:
    t0 = time.perf_counter()
    try:
        result = brute_force_threshold(args.m, args.n, precision_bits=args.precision_bits)
    except CapExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if args.format == "json":
        rec = _record(
            {"command": "oracle", "m": args.m, "n": args.n},
            {"kind": "threshold", **result.to_json()},
            t0, args.precision_bits, None,
        )
        print(json.dumps(rec))
    else:
        _print_threshold_text(result, args.digits, args.exact)
    return 0


def cmd_demo(args) -> int:
    t0 = time.perf_counter()
    try:
        result = compute_threshold(args.m, args.n, precision_bits=args.precision_bits)
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    phi = StabilityPolynomial.from_result(result)
    order_rep = check_order(phi, args.n, result.precision_bits)
    mono_rep = check_abs_monotonic(phi, args.m)
    sys_ = MetzlerSystem.upwind(args.size, args.alpha)
    pos_rep = positivity_demo(args.m, args.n, sys_, steps=args.steps,
                              trials=args.trials, seed=args.seed, result=result)
    con_rep = contractivity_demo(args.m, args.n, beta=args.alpha, result=result)
    reports = {
        "kind": "demo",
        "order": order_rep.to_json(),
        "absolutely_monotonic": mono_rep.to_json(),
        "positivity": pos_rep.to_json(),
        "contractivity": con_rep.to_json(),
    }
    if args.format == "json":
        rec = _record(
            {"command": "demo", "m": args.m, "n": args.n, "size": args.size,
             "steps": args.steps, "seed": args.seed},
            reports, t0, result.precision_bits, None,
        )
        print(json.dumps(rec))
    else:
        print(f"order conditions through {args.n}: "
              f"{'pass' if order_rep.passed else 'FAIL'}")
        print(f"absolute monotonicity: {'pass' if mono_rep.passed else 'FAIL'}")
        print(f"positivity at h = R/alpha = {pos_rep.step_size:.6g}: "
              f"{'pass' if pos_rep.passed else 'FAIL'} "
              f"(min component {pos_rep.min_component:.3g})")
        print(f"violation found at 1.05 h: {pos_rep.violation_found_above_bound}")
        print(f"contractivity (normal case): "
              f"{'pass' if con_rep.passed else 'FAIL'} "
              f"(max amplification {con_rep.max_amplification:.12g})")
    ok = order_rep.passed and mono_rep.passed and pos_rep.passed and con_rep.passed
    return 0 if ok else COMPUTE_ERROR


def _add_common(sub, digits_default=10):
    sub.add_argument("--precision-bits", type=int, default=hp.DEFAULT_PRECISION_BITS)
    sub.add_argument("--format", choices=("text", "json", "csv"), default="text")
    sub.add_argument("--digits", type=int, default=digits_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thresholdopt",
        description="Optimal threshold factors of explicit one-step methods",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("compute", help="one optimal threshold factor")
    s.add_argument("m", type=int)
    s.add_argument("n", type=int)
    s.add_argument("--exact", action="store_true",
                   help="include the defining polynomial and rational enclosure")
    s.add_argument("--config-order", choices=("lex", "random"), default="lex")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--jobs", type=int, default=1)
    _add_common(s)
    s.set_defaults(func=cmd_compute)

    s = subs.add_parser("table", help="sweep a grid of (m, n) cells")
    s.add_argument("--m", required=True, help="list/range, e.g. 5:200:5 or 10,20")
    s.add_argument("--n", required=True, help="list, e.g. 5,7,9,11")
    s.add_argument("--jobs", type=int, default=1)
    _add_common(s, digits_default=4)
    s.set_defaults(func=cmd_table)

    s = subs.add_parser("bounds", help="Laguerre bracket for an odd order")
    s.add_argument("m", type=int)
    s.add_argument("n", type=int)
    _add_common(s, digits_default=4)
    s.set_defaults(func=cmd_bounds)

    s = subs.add_parser("check", help="fast path against the brute-force oracle")
    s.add_argument("m", type=int)
    s.add_argument("n", type=int)
    _add_common(s)
    s.set_defaults(func=cmd_check)

    s = subs.add_parser("oracle", help="brute-force reference computation")
    s.add_argument("m", type=int)
    s.add_argument("n", type=int)
    s.add_argument("--exact", action="store_true")
    _add_common(s)
    s.set_defaults(func=cmd_oracle)

    s = subs.add_parser("demo", help="validation checks and IVP positivity demo")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--size", type=int, default=20)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    _add_common(s)
    s.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
