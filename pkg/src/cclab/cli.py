"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 unreadable instance or scheme,
3 LP solver failure, 4 certification found a violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .certificate import (
    bisect_threshold,
    certify,
    extremal_tables,
    lb_ccc,
    lb_wcc,
    violation_region,
)
from .certificate.bounds import curve_clear_of_region, region_csv
from .certificate.tables import LAYOUTS
from .exact import ExactTooLarge, exact
from .instance import (
    CCCInstance,
    InstanceError,
    generate_planted,
    instance_cost,
    instance_hash,
    load_instance,
    serialize_instance,
)
from .lp import LpError, solve_lp
from .pivot import default_algorithm, monte_carlo, resolve_workers
from .rounding import RoundingScheme, SchemeError, ccc_fcirc, ccc_fplus, preset, validate_rounding

EXIT_USAGE, EXIT_PARSE, EXIT_SOLVER, EXIT_VIOLATION = 1, 2, 3, 4
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _scheme(name_or_path: str) -> RoundingScheme:
    p = Path(name_or_path)
    if p.suffix == ".json" or p.is_file():
        try:
            return RoundingScheme.from_json(p.read_text(encoding="utf-8"))
        except (OSError, ValueError, KeyError) as e:
            raise SchemeError(f"cannot read scheme file {p}: {e}") from None
    return preset(name_or_path)


def _default_scheme(inst) -> str:
    return "ccc_neutral_scheme" if isinstance(inst, CCCInstance) else "wcc_tight"


def _config(args) -> dict:
    skip = {"func", "workers", "output"}  # neither changes the result
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = str(v) if isinstance(v, (Fraction, Path)) else v
    return out


def _meta(args, inst=None) -> dict:
    meta = {"tool": "cclab", "version": __version__, "command": args.command, "config": _config(args)}
    if inst is not None:
        meta["instance_hash"] = instance_hash(inst)
    return meta


def _emit(doc, out: str | None, text: bool = False):
    payload = doc if text else json.dumps(doc, indent=2) + "\n"
    if out in (None, "-"):
        sys.stdout.write(payload)
    else:
        Path(out).write_text(payload, encoding="utf-8")


def _num(v):
    return float(v) if isinstance(v, Fraction) else v


# --------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    inst, planted = generate_planted(args.n, args.k, args.noise, args.seed, args.flavor, args.L, args.max_weight)
    text = serialize_instance(inst)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    summary = {
        "flavor": args.flavor,
        "n": inst.n,
        "planted_cost": _num(instance_cost(inst, planted)),
        "instance_hash": instance_hash(inst),
    }
    print(json.dumps(summary), file=sys.stderr if not args.output else sys.stdout)
    return 0


def cmd_validate(args) -> int:
    doc = {}
    if args.input:
        inst = load_instance(args.input)
        doc["instance"] = {"flavor": inst.flavor, "n": inst.n, "instance_hash": instance_hash(inst), "valid": True}
    if args.scheme:
        sch = _scheme(args.scheme)
        v = validate_rounding(sch)
        doc["scheme"] = {
            "name": sch.name,
            "valid": not v,
            "violations": [{"function": x.function, "condition": x.condition, "witness": [str(w) for w in x.witness]} for x in v],
        }
    if not doc:
        raise UsageError("validate needs an instance path or --scheme")
    _emit(doc, args.output)
    return 0


def cmd_lp(args) -> int:
    inst = load_instance(args.input)
    sol = solve_lp(inst)
    _emit({"meta": _meta(args, inst), "solution": sol.to_dict()}, args.output)
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.input)
    scheme = _scheme(args.scheme or _default_scheme(inst))
    sol = solve_lp(inst)
    stats = monte_carlo(inst, sol, scheme, args.trials, args.seed, default_algorithm(inst), args.workers)
    lp_obj = sol.objective
    doc = {
        "meta": _meta(args, inst),
        "scheme": scheme.name,
        "algorithm": default_algorithm(inst),
        "lp_objective": lp_obj,
        "monte_carlo": stats.to_dict(),
    }
    if lp_obj > 1e-9:
        doc["ratio_mean_lp"] = stats.mean / lp_obj
    elif stats.mean == 0:
        doc["ratio_mean_lp"] = None
        doc["status"] = "optimal, cost 0"
    else:
        doc["ratio_mean_lp"] = None
    if args.exact:
        res = exact(inst)
        opt = float(res.cost)
        doc["opt"] = opt
        doc["exact"] = res.to_dict()
        doc["ratio_mean_opt"] = stats.mean / opt if opt > 0 else None
    _emit(doc, args.output)
    return 0


def cmd_exact(args) -> int:
    inst = load_instance(args.input)
    res = exact(inst)
    _emit({"meta": _meta(args, inst), "result": res.to_dict()}, args.output)
    return 0


def cmd_certify(args) -> int:
    scheme = _scheme(args.scheme)
    report = certify(args.mode, scheme, args.alpha, args.step, workers=args.workers, heatmap=bool(args.heatmap))
    doc = {"meta": _meta(args), "report": report.to_dict()}
    if args.tables:
        layout = args.layout or (scheme.name if scheme.name in LAYOUTS else None)
        if layout is None:
            raise UsageError(f"--tables needs --layout for scheme {scheme.name!r}")
        doc["tables"] = [r.to_dict() for r in extremal_tables(scheme, args.alpha, layout)]
    if args.region:
        Path(args.region).write_text(region_csv(violation_region(scheme.fplus, float(args.alpha))), encoding="utf-8")
    if args.heatmap:
        Path(args.heatmap).write_text(report.heatmap_csv(), encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report.violations_csv(), encoding="utf-8")
    _emit(doc, args.output)
    if not report.ok:
        w = report.violations[0]
        print(f"violation: gap {w['gap']:.6g} at {json.dumps(w['config'])}", file=sys.stderr)
        return EXIT_VIOLATION
    return 0


def cmd_lowerbound(args) -> int:
    check = lb_wcc if args.mode == "wcc" else lb_ccc
    if args.bisect:
        lo, hi = args.bisect
        thr = bisect_threshold(check, float(lo), float(hi))
        doc = {"meta": _meta(args), "mode": args.mode, "threshold": thr}
        line = f"{thr:.4f}"
    elif args.alpha is not None:
        rep = check(args.alpha)
        doc = {"meta": _meta(args), **rep.to_dict()}
        line = "feasible" if rep.feasible else "infeasible"
    else:
        raise UsageError("lowerbound needs --alpha or --bisect LO HI")
    print(line)
    if args.output:
        _emit(doc, args.output)
    return 0


def cmd_region(args) -> int:
    fplus = _scheme(args.scheme).fplus if args.scheme else ccc_fplus()
    fcirc = _scheme(args.scheme).fcirc if args.scheme else ccc_fcirc()
    pts = violation_region(fplus, float(args.alpha), args.resolution)
    _emit(region_csv(pts), args.output, text=True)
    hit = curve_clear_of_region(fcirc, fplus, float(args.alpha), args.resolution)
    msg = "neutral function stays outside the region" if hit is None else f"neutral function enters the region at t={hit}"
    print(msg, file=sys.stderr)
    return 0 if hit is None else EXIT_VIOLATION


def cmd_bench(args) -> int:
    timings = {}
    t = time.perf_counter()
    certify("wcc", preset("wcc_tight"), Fraction(10, 3), 0.01, workers=args.workers)
    timings["certify_wcc"] = time.perf_counter() - t
    if args.full:
        t = time.perf_counter()
        certify("ccc", preset("ccc_neutral_scheme"), Fraction(43, 20), 0.005, workers=args.workers)
        timings["certify_ccc"] = time.perf_counter() - t
    inst, _ = generate_planted(args.n, 3, 0.3, args.seed, "wcc")
    t = time.perf_counter()
    sol = solve_lp(inst)
    timings["lp_wcc"] = time.perf_counter() - t
    t = time.perf_counter()
    monte_carlo(inst, sol, preset("wcc_tight"), args.trials, args.seed, workers=args.workers)
    timings["monte_carlo"] = time.perf_counter() - t
    _emit({"meta": _meta(args), "seconds": timings}, args.output)
    return 0


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cclab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cclab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=False, workers=False):
        sp.add_argument("-o", "--output", help="write the result here instead of stdout")
        if seed:
            sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
        if workers:
            sp.add_argument("--workers", type=int, default=None, help="worker processes (default $CCLAB_WORKERS or 1)")

    g = sub.add_parser("gen", help="generate a planted instance")
    g.add_argument("--flavor", choices=("cc", "wcc", "ccc"), default="cc")
    g.add_argument("-n", type=int, required=True)
    g.add_argument("-k", type=int, required=True, help="number of planted clusters")
    g.add_argument("-L", type=int, default=1, help="number of colors (ccc)")
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--max-weight", type=int, default=10, help="largest raw wcc weight")
    common(g, seed=True)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("validate", help="check an instance file and/or a rounding scheme")
    v.add_argument("input", nargs="?")
    v.add_argument("--scheme")
    common(v)
    v.set_defaults(func=cmd_validate)

    lp = sub.add_parser("lp", help="solve the LP relaxation")
    lp.add_argument("input")
    common(lp)
    lp.set_defaults(func=cmd_lp)

    s = sub.add_parser("solve", help="LP plus randomized pivot rounding, Monte-Carlo estimate")
    s.add_argument("input")
    s.add_argument("--scheme", help="preset name or JSON scheme file (default depends on flavor)")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--exact", action="store_true", help="also compute the optimum by enumeration")
    common(s, seed=True, workers=True)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("exact", help="optimal clustering by enumeration (small n)")
    e.add_argument("input")
    common(e)
    e.set_defaults(func=cmd_exact)

    c = sub.add_parser("certify", help="grid certificate for an approximation factor")
    c.add_argument("--mode", choices=("wcc", "ccc"), required=True)
    c.add_argument("--scheme", required=True, help="preset name or JSON scheme file")
    c.add_argument("--alpha", type=_fraction, required=True)
    c.add_argument("--step", type=_fraction, default=None, help="grid step (default 0.01 wcc, 0.005 ccc)")
    c.add_argument("--tables", action="store_true", help="add exact extremal tables")
    c.add_argument("--layout", choices=sorted(LAYOUTS), help="region layout for --tables")
    c.add_argument("--region", help="write the neutral-function violation region CSV here")
    c.add_argument("--heatmap", help="write x,y,gap CSV here")
    c.add_argument("--csv", help="write violations as CSV here")
    common(c, workers=True)
    c.set_defaults(func=cmd_certify)

    lb = sub.add_parser("lowerbound", help="closed-form lower-bound checks")
    lb.add_argument("--mode", choices=("wcc", "ccc"), required=True)
    lb.add_argument("--alpha", type=_fraction)
    lb.add_argument("--bisect", nargs=2, type=float, metavar=("LO", "HI"))
    common(lb)
    lb.set_defaults(func=cmd_lowerbound)

    r = sub.add_parser("region", help="CSV of (x, p) where a neutral probability breaks the factor")
    r.add_argument("--alpha", type=float, default=2.15)
    r.add_argument("--resolution", type=float, default=1e-3)
    r.add_argument("--scheme", help="scheme supplying f+ and f-circ (default: the chromatic preset)")
    common(r)
    r.set_defaults(func=cmd_region)

    b = sub.add_parser("bench", help="time the main pipelines")
    b.add_argument("-n", type=int, default=20)
    b.add_argument("--trials", type=int, default=2000)
    b.add_argument("--full", action="store_true", help="include the chromatic certificate")
    common(b, seed=True, workers=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is not None:
        args.workers = resolve_workers(args.workers)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"cclab: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, SchemeError, OSError) as e:
        print(f"cclab: {e}", file=sys.stderr)
        return EXIT_PARSE
    except LpError as e:
        print(f"cclab: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except (ExactTooLarge, ValueError) as e:
        print(f"cclab: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
