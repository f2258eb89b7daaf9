"""Command-line front end.

Exit status is 0 on success, 1 on a domain error (the diagnostic names the
failing check) and 2 on a usage error.  Relative output paths are resolved
against ``$TRSDOF_OUTPUT_DIR`` when that variable is set.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from .errors import DofError
from .topology import (
    as_rational,
    format_decimal,
    format_rational,
    format_topology,
    load_topology,
    make_realistic_topology,
    parse_user_list,
    power_policy,
)

OUTPUT_DIR_ENV = "TRSDOF_OUTPUT_DIR"
SCHEME_CHOICES = ("zfbf", "rs", "trs-orth", "trs-max", "all")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _sweep(text: str) -> list[float]:
    """``start:step:stop`` (inclusive) or a comma separated list of dB values."""
    try:
        if ":" in text:
            start, step, stop = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step)) + 1
            return [start + i * step for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sweep {text!r}; use start:step:stop") from exc


def _output_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trsdof", description="DoF analysis of MISO interference channels with imperfect CSIT.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("region", help="list the inequalities of a DoF region")
    p.add_argument("topology")
    p.add_argument("--set", dest="users", required=True, help="users with private DoF, e.g. 2,3")
    p.add_argument("--scheme", choices=("rs", "zfbf"), default="rs")

    p = sub.add_parser("plan", help="print a topological rate-splitting plan")
    p.add_argument("topology")
    p.add_argument("--set", dest="users", help="active users (default: the optimizer's choice)")
    p.add_argument("--r", dest="powers", help="private exponents, e.g. 1/5,1/5,1/5 (default: optimizer's)")
    p.add_argument("--exact-rhs", action="store_true", help="use the exact lowest-layer bounds")
    p.add_argument("--mode", choices=("maximal", "orthogonal"), default="maximal")

    p = sub.add_parser("sumdof", help="best sum DoF of one or all schemes")
    p.add_argument("topology")
    p.add_argument("--scheme", choices=SCHEME_CHOICES, default="all")
    p.add_argument("--search", choices=("exact", "grid"), default="exact")
    p.add_argument("--max-users", type=int, default=8)

    p = sub.add_parser("compare", help="compare all schemes; -o writes CSV and a bar chart")
    p.add_argument("topology")
    p.add_argument("-o", "--output", help="CSV report path; a .png figure is written beside it")
    p.add_argument("--search", choices=("exact", "grid"), default="exact")
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("--no-closed-form-check", action="store_true")

    p = sub.add_parser("simulate", help="Monte Carlo rates of a plan over an SNR sweep")
    p.add_argument("topology")
    p.add_argument("--sweep", type=_sweep, default=_sweep("30:10:60"), help="dB values, start:step:stop")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--set", dest="users", help="active users (default: all)")
    p.add_argument("--r", dest="powers", help="private exponents (default: the optimizer's policy)")
    p.add_argument("--mode", choices=("maximal", "orthogonal"), default="maximal")
    p.add_argument("--per-draw", action="store_true", help="scale layers draw by draw instead of ergodically")
    p.add_argument("-o", "--output", help="CSV path; a .png figure is written beside it")
    p.add_argument("--no-figure", action="store_true")

    p = sub.add_parser("cyclic-gen", help="write a ring topology where each user hears three transmitters")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--a", type=_rational, required=True)
    p.add_argument("--b", type=_rational, required=True)
    p.add_argument("--orientation", help="K bits; 1 swaps a and b at that user (default all 0)")
    p.add_argument("-o", "--output")
    return parser


def _policy(args, t, mode):
    """Active set and exponents from flags, or from the optimizer when omitted."""
    from .optimizer import sum_dof_trs

    users = parse_user_list(args.users, t.K) if args.users else None
    if args.powers:
        r = power_policy([as_rational(x) for x in args.powers.split(",")], t.K)
        return users if users is not None else tuple(range(t.K)), r
    best = sum_dof_trs(t, mode=mode)
    if users is None:
        return best.S, best.r
    return users, tuple(x if k in users else Fraction(0) for k, x in enumerate(best.r))


def _cmd_region(args, out):
    from .regions import rs_region, zfbf_region

    t = load_topology(args.topology)
    users = parse_user_list(args.users, t.K)
    region = (rs_region if args.scheme == "rs" else zfbf_region)(t, users)
    out.write(region.dump())


def _cmd_plan(args, out):
    from .topology import effective_zfbf_topology
    from .trs import build_trs_plan, format_plan, plan_sum_dof, trs_constraint_systems

    t = load_topology(args.topology)
    te = t if t.is_fully_connected() else effective_zfbf_topology(t)
    users, r = _policy(args, te, args.mode)
    plan = build_trs_plan(te, users, r)
    out.write(format_plan(plan))
    system = trs_constraint_systems(plan, exact=args.exact_rhs)
    for layer, rows in zip(plan.layers, system.layers):
        for row in rows:
            lhs = " + ".join(f"d_{layer.index}_{j + 1}" for j in sorted(row.members))
            out.write(f"{lhs} <= {format_rational(row.rhs)}\n")
    value = plan_sum_dof(plan, args.mode)
    out.write(f"sum DoF ({args.mode}): {format_rational(value.total)} {format_decimal(value.total)}\n")


def _cmd_sumdof(args, out):
    from .optimizer import RS, TRS_MAX, TRS_ORTH, ZFBF, SweepConfig, sum_dof_rs, sum_dof_trs, sum_dof_zfbf
    from .trs import MAXIMAL, ORTHOGONAL

    t = load_topology(args.topology)
    cfg = SweepConfig(max_users=args.max_users, search=args.search)
    runners = {
        ZFBF: lambda: sum_dof_zfbf(t, cfg),
        RS: lambda: sum_dof_rs(t, cfg),
        TRS_ORTH: lambda: sum_dof_trs(t, cfg, ORTHOGONAL),
        TRS_MAX: lambda: sum_dof_trs(t, cfg, MAXIMAL),
    }
    schemes = list(runners) if args.scheme == "all" else [args.scheme]
    for scheme in schemes:
        if scheme == RS and args.scheme == "all" and not t.is_fully_connected():
            out.write(f"{scheme}\tn/a\n")
            continue
        res = runners[scheme]()
        out.write(f"{scheme}\t{format_rational(res.value)}\t{format_decimal(res.value)}\n")


def _cmd_compare(args, out):
    from .optimizer import SweepConfig, compare_schemes

    t = load_topology(args.topology)
    cfg = SweepConfig(search=args.search, check_closed_forms=not args.no_closed_form_check)
    report = compare_schemes(t, cfg)
    out.write(report.to_text())
    if args.output:
        path = _output_path(args.output)
        path.write_text(report.to_csv(), encoding="utf-8")
        out.write(f"wrote {path}\n")
        if not args.no_figure:
            from .plotting import plot_comparison

            fig = plot_comparison(report, path.with_suffix(".png"))
            out.write(f"wrote {fig}\n")


def _cmd_simulate(args, out):
    from .linksim import estimate_slope, simulate_rates
    from .topology import effective_zfbf_topology
    from .trs import build_trs_plan, plan_sum_dof

    t = load_topology(args.topology)
    te = t if t.is_fully_connected() else effective_zfbf_topology(t)
    users, r = _policy(args, te, args.mode)
    plan = build_trs_plan(te, users, r)
    predicted = plan_sum_dof(plan, args.mode).total
    if args.trials < 100:
        raise UsageError("trsdof simulate: error: --trials must be at least 100")
    result = simulate_rates(t, plan, args.sweep, args.trials, args.seed, args.mode, ergodic=not args.per_draw)
    slopes = estimate_slope(result, predicted)
    summary = (
        f"predicted sum DoF {format_rational(predicted)} {format_decimal(predicted)}\n"
        f"aggregate slope {slopes.aggregate.slope:.4f} +/- {slopes.aggregate.stderr:.4f}\n"
    )
    if args.output:
        path = _output_path(args.output)
        path.write_text(result.to_csv(), encoding="utf-8")
        out.write(summary)
        out.write(f"wrote {path}\n")
        if not args.no_figure:
            from .plotting import plot_rate_sweep

            fig = plot_rate_sweep(result, path.with_suffix(".png"), predicted)
            out.write(f"wrote {fig}\n")
    else:
        out.write(result.to_csv())
        sys.stderr.write(summary)


def _cmd_cyclic_gen(args, out):
    orientation = None
    if args.orientation:
        if len(args.orientation) != args.K or set(args.orientation) - {"0", "1"}:
            raise UsageError(f"trsdof cyclic-gen: error: --orientation must be {args.K} bits")
        orientation = [int(c) for c in args.orientation]
    t = make_realistic_topology(args.K, args.a, args.b, orientation)
    text = format_topology(t)
    if args.output:
        path = _output_path(args.output)
        path.write_text(text, encoding="utf-8")
    else:
        out.write(text)


COMMANDS = {
    "region": _cmd_region,
    "plan": _cmd_plan,
    "sumdof": _cmd_sumdof,
    "compare": _cmd_compare,
    "simulate": _cmd_simulate,
    "cyclic-gen": _cmd_cyclic_gen,
}


def run(argv=None, out=None) -> int:
    """Execute one command; returns the exit status."""
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 2
    except DofError as exc:
        sys.stderr.write(f"{exc.diagnostic()}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
