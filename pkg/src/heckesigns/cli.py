"""Command-line entry point: ``python3 -m heckesigns <command> ...``.

Exit codes: 0 success, 1 invariant violation (or failed selftest), 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import chebst, lab, specfun
from .errors import BudgetExceeded, InvariantViolation
from .forms import FormSpec, build_table_cached
from .signs import first_negative, first_sign_difference, sign_agreement

CONFIG_HELP = """\
config file: flat 'key = value' lines ('#' comments); keys are the long option
names of the chosen command with '-' written as '_' (e.g. p_max = 10000,
tol = 1e-10, cap = 8).  Flags given on the command line win over the file.

form syntax: delta | k12 | k16 | k20 | e4 | ec:A4,A6 | tor:A,B,C
"""


class UsageError(Exception):
    pass


def parse_form(text: str) -> FormSpec:
    t = text.strip().lower()
    named = {"delta": FormSpec.delta, "e4": FormSpec.e4}
    if t in named:
        return named[t]()
    if t in ("k12", "k16", "k20"):
        return FormSpec.level1(int(t[1:]))
    try:
        if t.startswith("ec:"):
            a4, a6 = (int(v) for v in t[3:].split(","))
            return FormSpec.curve(a4, a6)
        if t.startswith("tor:"):
            a, b, c = (int(v) for v in t[4:].split(","))
            return FormSpec.torsion_curve(a, b, c)
    except ValueError as e:
        raise UsageError(f"bad form {text!r}: {e}") from None
    raise UsageError(f"unknown form {text!r}")


def _int(v: str) -> int:
    return int(float(v)) if "e" in v.lower() else int(v)


# --- commands ------------------------------------------------------------


def cmd_coeffs(args) -> dict:
    spec = parse_form(args.form)
    t = build_table_cached(spec, args.p_max, max(args.p_max, 2), args.cache_dir)
    rows = [{"p": int(p), "a_p": t.prime_coeffs[int(p)], "lambda_p": float(v)}
            for p, v in zip(t.primes, t.prime_lam)]
    return {"experiment": "coeffs", "config": {"form": spec.label, "p_max": args.p_max},
            "records": rows}


def cmd_signs(args) -> dict:
    spec = parse_form(args.form)
    top = max(args.n_max, int(args.x))
    t = build_table_cached(spec, top, args.n_max, args.cache_dir)
    fn = first_negative(t)
    out = {"label": t.label, "n_f": fn.n_f, "first_negative_prime": fn.prime}
    if args.other:
        o = build_table_cached(parse_form(args.other), top, args.n_max, args.cache_dir)
        a = sign_agreement(t, o, args.x)
        d = first_sign_difference(t, o)
        out.update({"other": o.label, "agreement": a.density, "n_primes": a.n_primes,
                    "first_sign_difference": d.n, "first_sign_difference_prime": d.prime})
    return {"experiment": "signs", "config": vars_clean(args), "records": [out]}


def cmd_kappa(args) -> dict:
    r = specfun.solve_kappa(args.tol, args.h)
    return {"experiment": "kappa", "config": {"tol": args.tol, "h": args.h},
            "records": [{"kappa": r.kappa, "residual": r.residual, "iterations": r.iterations,
                         "exponent_1_over_2kappa": 1 / (2 * r.kappa)}]}


def cmd_beta(args) -> dict:
    alpha = specfun.StepFunction.remark_alpha(args.cap)
    cfg = {"cap": args.cap, "h": args.h, "u_max": args.u_max}
    if args.zero:
        z = specfun.beta_first_zero(alpha, args.h, (0.0, args.u_max))
        return {"experiment": "beta-zero", "config": cfg,
                "records": [{"u0": z.u0, "error_bar": z.error_bar, "beta_min": z.beta_min,
                             **{f"run_{k}": v for k, v in z.runs.items()}}]}
    g = specfun.beta_volterra(alpha, args.u_max, args.h)
    return {"experiment": "beta", "config": cfg,
            "records": [{"u": float(u), "beta": float(v)} for u, v in zip(g.nodes, g.values)]}


def cmd_cheb(args) -> dict:
    rec = {}
    if args.what in ("alpha0", "all"):
        s = chebst.poly_Y_suite()
        rec.update({k: (str(v) if isinstance(v, Fraction) else v) for k, v in s.items()
                    if isinstance(v, (int, float, str, bool, Fraction))})
    if args.what in ("gram", "all"):
        G = chebst.gram_matrix(args.n)
        rec["gram_max_dev"] = float(np.abs(G - np.eye(G.shape[0])).max())
    if args.what in ("bmv", "all"):
        for L in args.L:
            rec[f"bmv_st_integral_L{L}"] = str(chebst.bmv_beta_L_st_integral(L))
    return {"experiment": "cheb", "config": {"what": args.what}, "records": [rec]}


def _family(args) -> list:
    cfg = lab.FamilyConfig(A=args.A, B=args.B, torsion=args.torsion, p_max=args.p_max,
                           sample=args.sample, seed=args.seed)
    return lab.family_generate(cfg)


def cmd_exp(args) -> lab.ExperimentReport:
    name = args.name
    if name == "first-negative":
        return lab.exp_first_negative(_family(args), args.p_max, args.n_max, args.threads,
                                      args.cache_dir)
    if name == "prescribed-signs":
        signs = None
        if args.signs:
            primes = [p for p in range(2, int(args.z) + 1) if all(p % q for q in range(2, p))]
            eps = [1 if c == "+" else -1 for c in args.signs]
            if len(eps) != len(primes):
                raise UsageError(f"--signs needs {len(primes)} characters (one per prime <= z)")
            signs = dict(zip(primes, eps))
        return lab.exp_prescribed_signs(_family(args), args.z, signs, args.threads)
    if name == "pair-signs":
        forms = args.forms or ["delta", "k16"]
        specs = [parse_form(f) for f in forms]
        x = int(args.x)
        tables = lab.parallel_map(lambda s: build_table_cached(s, x, 2, args.cache_dir),
                                  specs, args.threads)
        return lab.exp_pair_signs(tables, x)
    if name == "moment-sums":
        specs = _family(args)
        tables = lab.family_tables(specs, 2 * args.P, 2, args.threads, args.cache_dir)
        return lab.exp_moment_sums(tables, args.P, args.nu, args.j)
    if name == "mod2":
        if args.torsion <= 0:
            raise UsageError("mod2 needs a full-2-torsion family (--torsion T)")
        return lab.exp_mod2(_family(args), args.p_max, args.threads)
    raise UsageError(f"unknown experiment {name!r}")


def selftest_checks() -> list[tuple[str, bool]]:
    """Exact fixtures that must hold on every build."""
    from .forms import build_table, ec_ap
    checks = []
    cm = build_table(FormSpec.curve(1, 0), 100, 100)
    fn = first_negative(cm)
    checks.append(("ec x^3+x: a(9) = -3", round(cm.lam[9] * 3) == -3))
    checks.append(("ec x^3+x: a(13) = -6", ec_ap(1, 0, 13) == -6))
    checks.append(("ec x^3+x: n_f = 9, first negative prime 13", (fn.n_f, fn.prime) == (9, 13)))
    d = build_table(FormSpec.delta(), 100, 100)
    checks.append(("delta: a(2) = -24, n_f = 2",
                   d.prime_coeffs[2] == -24 and first_negative(d).n_f == 2))
    k = specfun.solve_kappa(1e-10)
    checks.append(("kappa > 10/9 and > (e/2)^(1/3)",
                   k.kappa > 10 / 9 and k.kappa > (math.e / 2) ** (1 / 3)))
    checks.append(("1/(2 kappa) <= 9/20", 1 / (2 * k.kappa) <= 0.45))
    s = chebst.poly_Y_suite(grid_points=2000)
    checks.append(("Y(2) = 2981/3000", s["Y_at_2"] == Fraction(2981, 3000)))
    checks.append(("alpha0 to 12 digits", s["alpha0_matching_digits"] >= 12))
    checks.append(("beta_L integrates to 1/(L+1)",
                   all(chebst.bmv_beta_L_st_integral(L) == Fraction(1, L + 1) for L in (3, 5, 11))))
    g = specfun.beta_volterra(specfun.StepFunction.remark_alpha(8), 0.1, 1e-3)
    checks.append(("beta = 1 below 1/(M+1)", bool(np.all(np.abs(g.values - 1) < 1e-12))))
    return checks


# --- parser --------------------------------------------------------------


def vars_clean(args) -> dict:
    return {k: v for k, v in vars(args).items()
            if k not in ("func", "out", "format", "config", "cache_dir", "threads")}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value file")
    common.add_argument("--cache-dir", type=Path, help="coefficient cache directory")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="heckesigns", parents=[common], epilog=CONFIG_HELP,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_, epilog=CONFIG_HELP,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.set_defaults(func=func)
        return sp

    sp = add("coeffs", cmd_coeffs, "exact a(p) and normalized lambda(p)")
    sp.add_argument("--form", default="delta")
    sp.add_argument("--p-max", type=_int, default=1000)

    sp = add("signs", cmd_signs, "first negative coefficient and sign agreement")
    sp.add_argument("--form", default="delta")
    sp.add_argument("--other")
    sp.add_argument("--x", type=float, default=1e4)
    sp.add_argument("--n-max", type=_int, default=10_000)

    sp = add("kappa", cmd_kappa, "root of rho(2u) = 2 log u")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--h", type=float, default=specfun.RHO_STEP)

    sp = add("beta", cmd_beta, "beta for the capped step kernel")
    sp.add_argument("--cap", type=int, default=8)
    sp.add_argument("--h", type=float, default=5e-4)
    sp.add_argument("--u-max", type=float, default=2.0)
    sp.add_argument("--zero", action="store_true", help="report the first zero instead of the grid")

    sp = add("cheb", cmd_cheb, "Chebyshev / Sato-Tate / polynomial checks")
    sp.add_argument("--what", choices=("alpha0", "gram", "bmv", "all"), default="all")
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--L", type=int, nargs="+", default=[3, 5, 11, 101])

    sp = add("exp", cmd_exp, "run an experiment over a family of forms")
    sp.add_argument("name", choices=("first-negative", "prescribed-signs", "pair-signs",
                                     "moment-sums", "mod2"))
    sp.add_argument("--A", type=int, default=10)
    sp.add_argument("--B", type=int, default=10)
    sp.add_argument("--torsion", type=int, default=0)
    sp.add_argument("--sample", type=int, default=0)
    sp.add_argument("--p-max", type=_int, default=1000)
    sp.add_argument("--n-max", type=_int, default=1000)
    sp.add_argument("--z", type=float, default=13)
    sp.add_argument("--signs", help="one '+' or '-' per prime <= z")
    sp.add_argument("--x", type=float, default=1e5)
    sp.add_argument("--forms", nargs="+")
    sp.add_argument("--P", type=int, default=1000)
    sp.add_argument("--nu", type=int, default=1)
    sp.add_argument("--j", type=int, default=1)

    add("selftest", None, "run the exact fixture suite")
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        cfg = lab.load_config(args.config)
    except (OSError, ValueError) as e:
        parser.error(str(e))
    sp = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sp._actions}
    unknown = sorted(set(cfg) - known)
    if unknown:
        parser.error(f"unknown config keys: {', '.join(unknown)}")
    sp.set_defaults(**cfg)
    return parser.parse_args(argv)


def _emit(report, args) -> None:
    if isinstance(report, dict):
        report = lab.ExperimentReport(report["experiment"], report["config"], report["records"])
    text = report.to_json() if args.format == "json" else report.to_csv()
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "selftest":
            checks = selftest_checks()
            for name, ok in checks:
                print(f"{'PASS' if ok else 'FAIL'}  {name}")
            return 0 if all(ok for _, ok in checks) else 1
        _emit(args.func(args), args)
        return 0
    except InvariantViolation as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, BudgetExceeded) as e:
        print(f"usage error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
