"""Run every family experiment once and write JSON reports.

    python3 scripts/family_reports.py --A 71 --B 71 --threads 4 --out results/
"""

import argparse
from pathlib import Path

from heckesigns import lab
from heckesigns.forms import FormSpec, build_table_cached, level1_newform


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--A", type=int, default=71)
    ap.add_argument("--B", type=int, default=71)
    ap.add_argument("--torsion", type=int, default=6)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--cache-dir", type=Path, default=None)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    box = lab.family_generate(lab.FamilyConfig(A=args.A, B=args.B))
    small = lab.family_generate(lab.FamilyConfig(A=10, B=10))
    tors = lab.family_generate(lab.FamilyConfig(torsion=args.torsion))

    reports = {
        "prescribed_signs": lab.exp_prescribed_signs(box, 13, threads=args.threads),
        "first_negative": lab.exp_first_negative(small, 2000, 2000, args.threads, args.cache_dir),
        "mod2": lab.exp_mod2(tors, 10_000, args.threads),
    }
    pair = [level1_newform(12, 100_000), level1_newform(16, 100_000),
            build_table_cached(FormSpec.curve(1, 0), 100_000, 2, args.cache_dir),
            build_table_cached(FormSpec.curve(-1, 1), 100_000, 2, args.cache_dir)]
    reports["pair_signs"] = lab.exp_pair_signs(pair, 100_000)
    tables = lab.family_tables(small[:100], 8000, 2, args.threads)
    for P in (500, 1000, 2000, 4000):
        reports[f"moments_P{P}"] = lab.exp_moment_sums(tables, P)

    for name, rep in reports.items():
        rep.write(args.out / f"{name}.json")
        print(f"{name:<18} {rep.wall_clock:7.2f}s  {rep.aggregate}")


if __name__ == "__main__":
    main()
