"""kappa under grid refinement, plus a rho table for plotting.

    python3 scripts/kappa_rho.py --out results/
"""

import argparse
from pathlib import Path

from heckesigns import specfun


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--u-max", type=float, default=6.0)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    print("h         kappa               residual")
    for K in (256, 512, 1024, 2048):
        k = specfun.solve_kappa(1e-12, 1 / K)
        print(f"1/{K:<6} {k.kappa:.16f}  {k.residual:.1e}")
    specfun.rho_grid(args.u_max).to_csv(args.out / "rho.csv")
    print(f"rho table written to {args.out / 'rho.csv'}")


if __name__ == "__main__":
    main()
