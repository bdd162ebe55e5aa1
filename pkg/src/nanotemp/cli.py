"""Command-line interface.

    nanotemp nmin-curve --tmin 1e-4 --tmax 1e4 --points 200 > fig1.csv
    nanotemp lmin --material silicon --T 1
    nanotemp ebar --t-ratio 1
    nanotemp verify --n 1 --groups 3 --local-dim 4
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import List, Optional

import numpy as np

from .chain import ChainParams
from .debye import ebar
from .errors import DomainError, TruncationError
from .nmin import get_material, log_grid, nmin_at, nmin_curve

CURVE_FIELDS = ["t_ratio", "bound_cond1", "bound_cond2", "n_min", "l_min_m"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.17g}"


def _emit(rows: List[dict], fields: List[str], fmt: str, out) -> None:
    if fmt == "json":
        json.dump(rows, out, indent=1)
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row[f]) for f in fields])


def _curve_row(point) -> dict:
    return {
        "t_ratio": point.t_ratio,
        "bound_cond1": point.bound1,
        "bound_cond2": point.bound2,
        "n_min": point.n_min,
        "l_min_m": point.l_min,
    }


def _resolve_t_ratio(args, parser) -> float:
    if args.T is not None:
        if not args.material:
            parser.error("--T requires --material")
        return args.T / get_material(args.material, args.materials_file).theta
    if args.t_ratio is None:
        parser.error("one of --t-ratio or --T is required")
    return args.t_ratio


def cmd_nmin_curve(args, parser, out) -> int:
    a0 = get_material(args.material, args.materials_file).a0 if args.material else None
    grid = log_grid(args.tmin, args.tmax, args.points)
    points = nmin_curve(grid, args.alpha, args.delta, a0)
    _emit([_curve_row(p) for p in points], CURVE_FIELDS, args.format, out)
    return 0


def cmd_lmin(args, parser, out) -> int:
    material = get_material(args.material, args.materials_file)
    t_ratio = _resolve_t_ratio(args, parser)
    point = nmin_at(t_ratio, args.alpha, args.delta, material.a0)
    row = {"material": material.name, "T_K": t_ratio * material.theta, **_curve_row(point)}
    fields = ["material", "T_K"] + CURVE_FIELDS
    _emit([row], fields, args.format, out)
    return 0


def cmd_ebar(args, parser, out) -> int:
    t_ratio = _resolve_t_ratio(args, parser)
    _emit([{"t_ratio": t_ratio, "ebar": ebar(t_ratio)}], ["t_ratio", "ebar"], args.format, out)
    return 0


def cmd_verify(args, parser, out) -> int:
    from .verify import run_checks

    params = ChainParams(n=args.n, n_groups=args.groups)
    results = run_checks(params, args.local_dim, beta=args.beta, max_dim=args.max_dim)
    for r in results:
        out.write(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}\n")
    failed = sum(not r.passed for r in results)
    out.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nanotemp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=10.0, help="energy window width (default 10)")
    common.add_argument("--delta", type=float, default=0.01, help="accuracy parameter (default 0.01)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--out", help="write to this path instead of stdout")
    common.add_argument("--materials-file", help="JSON material table (else $NANOTEMP_MATERIALS)")

    def temperature(p):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--t-ratio", type=float, help="temperature as T/theta")
        group.add_argument("--T", type=float, help="temperature in kelvin (needs --material)")

    p = sub.add_parser("nmin-curve", parents=[common], help="n_min on a log-spaced T/theta grid")
    p.add_argument("--tmin", type=float, default=1e-4)
    p.add_argument("--tmax", type=float, default=1e4)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--material", help="fill l_min_m using this material's lattice constant")
    p.set_defaults(func=cmd_nmin_curve)

    p = sub.add_parser("lmin", parents=[common], help="minimal length for one material")
    p.add_argument("--material", required=True)
    temperature(p)
    p.set_defaults(func=cmd_lmin)

    p = sub.add_parser("ebar", parents=[common], help="reduced thermal energy per site")
    p.add_argument("--material")
    temperature(p)
    p.set_defaults(func=cmd_ebar)

    p = sub.add_parser("verify", help="exact small-chain checks")
    p.add_argument("--n", type=int, default=1, help="sites per group")
    p.add_argument("--groups", type=int, default=3, help="number of groups")
    p.add_argument("--local-dim", type=int, default=4, help="occupation cutoff per mode")
    p.add_argument("--beta", type=float, default=0.2, help="inverse temperature for the off-diagonal scan")
    p.add_argument("--max-dim", type=int, default=20000, help="basis dimension cap")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    buf = io.StringIO()
    try:
        status = args.func(args, parser, buf)
    except (DomainError, TruncationError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"nanotemp: error: {msg}", file=sys.stderr)
        return 1
    text = buf.getvalue()
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
