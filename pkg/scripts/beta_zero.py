"""Locate the first zero of beta for the capped step kernel and compare with sieve data.

    python3 scripts/beta_zero.py --caps 8 12 16 --h 5e-4 --out results/
"""

import argparse
from pathlib import Path

from heckesigns import specfun


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--caps", type=int, nargs="+", default=[8, 12, 16])
    ap.add_argument("--h", type=float, default=5e-4)
    ap.add_argument("--u-max", type=float, default=2.0)
    ap.add_argument("--ys", type=float, nargs="*", default=[1e4, 1e5, 1e6])
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    print("cap  u0            error_bar   half_h        cap+4")
    for M in args.caps:
        alpha = specfun.StepFunction.remark_alpha(M)
        z = specfun.beta_first_zero(alpha, args.h, (0.0, args.u_max))
        print(f"{M:<4} {z.u0:.10f}  {z.error_bar:.2e}    {z.runs['half_h']:.10f}  {z.runs['cap_plus_4']:.10f}")
        specfun.beta_volterra(alpha, args.u_max, args.h).to_csv(args.out / f"beta_M{M}.csv")

    alpha = specfun.StepFunction.remark_alpha(args.caps[0])
    print("\ny        n of first negative partial sum    u = log n / log y")
    for y in args.ys:
        s = specfun.empirical_sign_change(y, alpha)
        print(f"{y:<8.0e} {s.n!s:<34} {s.u}")


if __name__ == "__main__":
    main()
