"""Command-line entry point.

Every subcommand writes its outputs into ``--out-dir`` together with a
``<name>.manifest.json`` that records the parameters, seed and version.
Exit status: 0 on success, 2 on flag errors, 1 on numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from . import __version__, circle_ops, depoisson, lax, montecarlo, painleve2, tableaux
from .errors import InvolutionLisError

SCHEMA_VERSION = 1
DIGITS = 12  # significant digits for every printed real
DIGITS_ENV = "INVOLUTION_LIS_MAX_DIGITS"


def _fmt(x) -> str:
    return f"{float(x):.{DIGITS}g}"


def _num(x):
    """Round a real to the declared digits so JSON output is reproducible."""
    return float(_fmt(x))


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (str, int)) else _fmt(v) for v in row])


def _manifest(args, outputs: list[Path]) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out_dir", "name")}
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": args.command,
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "tool_version": __version__,
        "outputs": [p.name for p in outputs],
    }


def _finish(args, outputs: list[Path]) -> int:
    out = Path(args.out_dir)
    _write_json(out / f"{args.name}.manifest.json", _manifest(args, outputs))
    for p in outputs:
        print(p)
    return 0


def _path(args, suffix: str) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{args.name}{suffix}"


def _grid():
    return painleve2.default_grid()


def _xs(args) -> np.ndarray:
    if args.step <= 0 or args.xmax < args.xmin:
        raise InvolutionLisError("need step > 0 and xmax >= xmin")
    count = int(math.floor((args.xmax - args.xmin) / args.step + 1e-9)) + 1
    return np.round(args.xmin + args.step * np.arange(count), 12)


# -- subcommands ---------------------------------------------------------------


def cmd_solve_pii(args) -> int:
    cfg = painleve2.BvpConfig(x_left=args.xmin, x_right=args.xmax, node_count=args.nodes)
    grid = painleve2.solve_hastings_mcleod(cfg)
    path = _path(args, ".csv")
    painleve2.export_csv(grid, path)
    return _finish(args, [path])


def cmd_tabulate_tw(args) -> int:
    grid = _grid()
    xs = _xs(args)
    vals = painleve2.eval_tw(grid, xs, args.ensemble)
    path = _path(args, ".csv")
    _write_csv(path, ("x", f"F{args.ensemble}"), zip(xs, vals))
    return _finish(args, [path])


def cmd_tabulate_interp(args) -> int:
    grid = _grid()
    xs = _xs(args)
    sq, di = lax.interpolant_curves(grid, xs, args.w)
    path = _path(args, ".csv")
    _write_csv(path, ("x", "F_square", "F_diamond"), zip(xs, sq, di))
    return _finish(args, [path])


def cmd_exact_cdf(args) -> int:
    which, k = ("column", args.column) if args.column else ("row", args.row or 1)
    table = tableaux.exact_cdf_table(args.n, args.m, which, k)
    rows = [
        {"l": l, "p": str(p), "p_num": p.numerator, "p_den": p.denominator, "p_float": _num(p)}
        for l, p in sorted(table.values.items())
    ]
    path = _path(args, ".json")
    _write_json(path, {"n": args.n, "m": args.m, "which": which, "k": k, "cdf": rows})
    return _finish(args, [path])


def cmd_pgen(args) -> int:
    req = circle_ops.GenFnRequest(
        args.family, args.l, args.t, args.alpha, args.beta, args.truncation, args.digits
    )
    v = circle_ops.pgen_detailed(req)
    path = _path(args, ".json")
    _write_json(
        path,
        {
            "family": args.family,
            "l": args.l,
            "t": args.t,
            "alpha": args.alpha,
            "beta": args.beta,
            "value": _num(v.value),
            "truncation_j_max": v.truncation_j_max,
            "certified_tail_bound": float(f"{v.certified_tail_bound:.3e}"),
        },
    )
    return _finish(args, [path])


def cmd_depoisson(args) -> int:
    phi2 = depoisson.square_surface(args.l)
    b = depoisson.bracket_two(phi2, args.n1, args.n2, args.d, C=args.C, tail=args.tail)
    record = {
        "n1_fixed_points": args.n1,
        "n2_two_cycles": args.n2,
        "l": args.l,
        "d": args.d,
        "lower": _num(b.lower),
        "upper": _num(b.upper),
        "slack_note": b.slack_note,
    }
    if 2 * args.n2 + args.n1 <= tableaux.SIZE_CAP:
        q = tableaux.exact_cdf(args.n2, args.n1, "row", 1, args.l)
        record["exact"] = str(q)
        record["contains_exact"] = b.contains(float(q))
    path = _path(args, ".json")
    _write_json(path, record)
    return _finish(args, [path])


def _limit_cdf(name: str):
    grid = _grid()
    if name in ("F1", "F2", "F4"):
        beta = int(name[1])
        return lambda x: painleve2.eval_tw(grid, x, beta)
    if name == "F1sq":
        return lambda x: painleve2.eval_tw(grid, x, 1) ** 2
    if name == "normal":
        return lambda x: 0.5 * math.erfc(-x / math.sqrt(2))
    fam, _, w = name.partition(":")
    if fam in ("Fsq", "Fdia") and w:
        w = float(w)
        f = lax.f_square if fam == "Fsq" else lax.f_diamond
        return lambda x: f(grid, x, w)
    raise InvolutionLisError(f"unknown limit {name!r}")


def limit_moments(name: str) -> tuple[float, float]:
    if name in ("F1", "F2", "F4"):
        return painleve2.tw_mean_var(_grid(), int(name[1]))
    if name == "normal":
        return 0.0, 1.0
    # mean and variance by integration by parts, split at 0 where the
    # integrand jumps
    xs = np.linspace(-14.0, 10.0, 4801)
    if name == "F1sq":
        F = painleve2.eval_tw(_grid(), xs, 1) ** 2
    else:
        fam, _, w = name.partition(":")
        sq, di = lax.interpolant_curves(_grid(), xs, float(w))
        F = sq if fam == "Fsq" else di
    neg, pos = xs <= 0, xs >= 0
    m1 = trapezoid(1 - F[pos], xs[pos]) - trapezoid(F[neg], xs[neg])
    m2 = trapezoid(2 * xs[pos] * (1 - F[pos]), xs[pos]) - trapezoid(2 * xs[neg] * F[neg], xs[neg])
    return float(m1), float(m2 - m1 * m1)


def _rule(args, prefix: str = "") -> montecarlo.SizeRule:
    explicit = getattr(args, f"{prefix}m" if prefix else "m", None)
    for kind in ("alpha", "w"):
        v = getattr(args, f"{prefix}{kind}" if prefix else kind, None)
        if v is not None:
            return montecarlo.SizeRule(kind, v)
    return montecarlo.SizeRule("explicit", explicit or 0)


def _spec_from_args(args) -> montecarlo.EnsembleSpec:
    kw = dict(kind=args.ensemble, n=args.n, seed=args.seed, which=args.which, gaussian_t=args.gaussian_t)
    if args.ensemble == "signed_involution":
        plus = montecarlo.SizeRule("w", args.w) if args.w is not None else (
            montecarlo.SizeRule("alpha", args.alpha) if args.alpha is not None else montecarlo.SizeRule("explicit", args.mplus)
        )
        minus = montecarlo.SizeRule("alpha", args.beta) if args.beta is not None else montecarlo.SizeRule("explicit", args.mminus)
        kw.update(m_plus_rule=plus, m_minus_rule=minus)
    else:
        kw["m_rule"] = _rule(args)
    return montecarlo.EnsembleSpec(**kw)


def _mc_report(spec, stat: str, samples: int, limit: str, workers: int) -> tuple[dict, np.ndarray]:
    ecdf = montecarlo.run_experiment(spec, stat, samples, workers)
    cdf = _limit_cdf(limit)
    lm, lv = limit_moments(limit)
    report = {
        "ensemble": spec.kind,
        "sizes": spec.sizes(),
        "statistic": stat,
        "which": spec.which,
        "scaling": montecarlo.scaling(spec)[2],
        "samples": samples,
        "seed": spec.seed,
        "limit": limit,
        "ks": _num(montecarlo.ks_distance(ecdf, cdf)),
        "mean": _num(ecdf.mean()),
        "var": _num(ecdf.var()),
        "limit_mean": _num(lm),
        "limit_var": _num(lv),
    }
    return report, ecdf.values


def cmd_mc(args) -> int:
    spec = _spec_from_args(args)
    report, values = _mc_report(spec, args.stat, args.samples, args.limit, args.workers)
    csv_path = _path(args, ".csv")
    _write_csv(csv_path, (args.stat,), ((v,) for v in values))
    json_path = _path(args, ".json")
    _write_json(json_path, report)
    return _finish(args, [csv_path, json_path])


# -- reproduction recipes -------------------------------------------------------

SR = montecarlo.SizeRule
ES = montecarlo.EnsembleSpec


def _recipe_mc(args, spec, limit, stat="chi1"):
    report, _ = _mc_report(spec, stat, args.samples, limit, args.workers)
    return report


def _recipe_poissonized(args) -> dict:
    rows = []
    for x in (-2.0, -1.0, 0.0, 1.0, 2.0):
        for fam, mode, par in (("signed", "det", 0.0), ("square", "alpha", 0.0), ("square", "w", args.w)):
            r = circle_ops.poissonized_limit_check(fam, x, par, [args.l], mode=mode)
            l, t, v, target, dist = r.rows[0]
            rows.append({"family": fam, "mode": mode, "x": x, "l": l, "t": _num(t), "value": _num(v), "limit": _num(target), "distance": _num(dist)})
    return {"l": args.l, "rows": rows}


def _recipe_gaussian_poissonized(args) -> dict:
    rows = []
    for x in (-1.5, -0.5, 0.5, 1.5):
        v, phi = circle_ops.gaussian_poisson_value(args.alpha_big, args.t, x)
        rows.append({"x": x, "value": _num(v), "normal": _num(phi)})
    return {"alpha": args.alpha_big, "t": args.t, "rows": rows}


RECIPES = {
    # fixed number of fixed points, alpha-scaling: F4 below alpha = 1, F1 at alpha = 1
    "row-alpha": lambda a: _recipe_mc(a, ES("involution_fixed_m", a.n, SR("alpha", a.alpha), seed=a.seed), "F4" if a.alpha < 1 else "F1"),
    "row-w": lambda a: _recipe_mc(a, ES("involution_fixed_m", a.n, SR("w", a.w), seed=a.seed), f"Fsq:{a.w}"),
    "column": lambda a: _recipe_mc(a, ES("involution_fixed_m", a.n, SR("alpha", a.beta), seed=a.seed, which="column"), "F1"),
    "signed-alpha": lambda a: _recipe_mc(
        a, ES("signed_involution", a.n, m_plus_rule=SR("alpha", a.alpha), m_minus_rule=SR("alpha", a.beta), seed=a.seed), "F2" if a.alpha < 1 else "F1sq"
    ),
    "signed-w": lambda a: _recipe_mc(
        a, ES("signed_involution", a.n, m_plus_rule=SR("w", a.w), m_minus_rule=SR("alpha", a.beta), seed=a.seed), f"Fdia:{a.w}"
    ),
    "uniform": lambda a: _recipe_mc(a, ES("uniform_involution", a.n, seed=a.seed), "F1"),
    "uniform-signed": lambda a: _recipe_mc(a, ES("uniform_signed_involution", a.n, seed=a.seed), "F1sq"),
    "second-row": lambda a: _recipe_mc(a, ES("involution_fixed_m", a.n, SR("alpha", a.alpha), seed=a.seed), "F4", "chi2"),
    "poissonized": _recipe_poissonized,
    "gaussian-poissonized": _recipe_gaussian_poissonized,
    "gaussian": lambda a: _recipe_mc(a, ES("involution_fixed_m", 0, SR("alpha", a.alpha_big), seed=a.seed, gaussian_t=a.t), "normal"),
}


RECIPE_HELP = {
    "row-alpha": "LIS with [alpha sqrt(2n)] fixed points vs F4 (alpha < 1) or F1 (alpha = 1)",
    "row-w": "LIS with [sqrt(2n) - 2w (2n)^(1/3)] fixed points vs F_square(.; w)",
    "column": "LDS with [beta sqrt(2n)] fixed points vs F1",
    "signed-alpha": "signed involutions, m+ = [alpha sqrt n], m- = [beta sqrt n], vs F2 or F1^2",
    "signed-w": "signed involutions at the critical m+ scaling vs F_diamond(.; w)",
    "uniform": "uniform involutions of n letters vs F1",
    "uniform-signed": "uniform signed involutions of n positive letters vs F1^2",
    "second-row": "second row with [alpha sqrt(2n)] fixed points vs F4",
    "poissonized": "generating functions along the edge scaling vs their limits, at index l",
    "gaussian-poissonized": "generating function at alpha > 1 vs the normal law",
    "gaussian": "fixed-size alpha > 1 regime (n = [t^2/2], m = [alpha t]) vs the normal law",
}


def cmd_reproduce(args) -> int:
    report = {"recipe": args.recipe, **RECIPES[args.recipe](args)}
    path = _path(args, ".json")
    _write_json(path, report)
    return _finish(args, [path])


# -- parser ----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, name: str) -> None:
    p.add_argument("--out-dir", default=".", help="directory for outputs and the manifest")
    p.add_argument("--name", default=name, help="file stem for outputs")


def _range(p: argparse.ArgumentParser, lo: float, hi: float, step: float) -> None:
    p.add_argument("--xmin", type=float, default=lo)
    p.add_argument("--xmax", type=float, default=hi)
    p.add_argument("--step", type=float, default=step)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="involution-lis", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-pii", help="solve for the Hastings-McLeod function and write the table")
    p.add_argument("--xmin", type=float, default=-10.0)
    p.add_argument("--xmax", type=float, default=8.0)
    p.add_argument("--nodes", type=int, default=4001)
    _common(p, "pii")
    p.set_defaults(func=cmd_solve_pii)

    p = sub.add_parser("tabulate-tw", help="tabulate F1, F2 or F4")
    p.add_argument("--ensemble", type=int, choices=painleve2.ENSEMBLES, required=True)
    _range(p, -8.0, 6.0, 0.1)
    _common(p, "tw")
    p.set_defaults(func=cmd_tabulate_tw)

    p = sub.add_parser("tabulate-interp", help="tabulate F_square(x; w) and F_diamond(x; w)")
    p.add_argument("--w", type=float, required=True)
    _range(p, -8.0, 6.0, 0.1)
    _common(p, "interp")
    p.set_defaults(func=cmd_tabulate_interp)

    p = sub.add_parser("exact-cdf", help="exact law of a row or column length on S_{n,m}")
    p.add_argument("--n", type=int, required=True, help="number of 2-cycles")
    p.add_argument("--m", type=int, required=True, help="number of fixed points")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--row", type=int, choices=(1, 2))
    g.add_argument("--column", type=int, choices=(1, 2))
    _common(p, "exact_cdf")
    p.set_defaults(func=cmd_exact_cdf)

    p = sub.add_parser("pgen", help="Poisson generating function value")
    p.add_argument("--family", choices=circle_ops.FAMILIES, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--truncation", type=int, default=None, help="largest polynomial index kept")
    p.add_argument("--digits", type=int, default=None)
    _common(p, "pgen")
    p.set_defaults(func=cmd_pgen)

    p = sub.add_parser("depoisson", help="bracket P(L <= l) on S_{n2,n1} from the Poisson surface")
    p.add_argument("--n1", type=int, required=True, help="number of fixed points")
    p.add_argument("--n2", type=int, required=True, help="number of 2-cycles")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--d", type=float, default=2.0)
    p.add_argument("--C", type=float, default=None, help="constant of the additive n^-d slack")
    p.add_argument("--tail", action="store_true", help="use explicit Poisson tails as slack")
    _common(p, "depoisson")
    p.set_defaults(func=cmd_depoisson)

    p = sub.add_parser("mc", help="Monte Carlo experiment against a limit law")
    p.add_argument("--ensemble", choices=montecarlo.KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--w", type=float, default=None)
    p.add_argument("--beta", type=float, default=None, help="signed: m- = [sqrt(n) beta]")
    p.add_argument("--mplus", type=int, default=0)
    p.add_argument("--mminus", type=int, default=0)
    p.add_argument("--gaussian-t", type=float, default=None)
    p.add_argument("--which", choices=("row", "column"), default="row")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stat", choices=("chi1", "chi2"), default="chi1")
    p.add_argument("--limit", required=True, help="F1, F2, F4, F1sq, Fsq:<w>, Fdia:<w> or normal")
    p.add_argument("--workers", type=int, default=1)
    _common(p, "mc")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser(
        "reproduce",
        help="run a named limit-law recipe",
        epilog="recipes:\n" + "\n".join(f"  {k:22s}{v}" for k, v in sorted(RECIPE_HELP.items())),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("recipe", choices=sorted(RECIPES))
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--w", type=float, default=0.5)
    p.add_argument("--l", type=int, default=400)
    p.add_argument("--t", type=float, default=60.0)
    p.add_argument("--alpha-big", type=float, default=2.0, help="alpha > 1 for the Gaussian recipes")
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _common(p, "reproduce")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if os.environ.get(DIGITS_ENV):
        circle_ops.MAX_DIGITS = int(os.environ[DIGITS_ENV])
    if args.command == "reproduce" and args.name == "reproduce":
        args.name = args.recipe
    try:
        return args.func(args)
    except InvolutionLisError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
