"""Separation residual against truncation for several (rho1, rho2) pairs.

    python scripts/separation_convergence.py --mode thm14 --out out/convergence
"""
import argparse
import time
from pathlib import Path

from cheese_lab.builder import build_plan
from cheese_lab.measures import separation_test
from cheese_lab.render import render_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mode", default="thm14", choices=["thm14", "thm15"])
    ap.add_argument("--N", type=int, default=12)
    ap.add_argument("--s-min", type=float, default=0.05)
    ap.add_argument("--truncations", type=int, nargs="+", default=[2, 5, 10, 20, 40])
    ap.add_argument("--out", default="out/convergence")
    args = ap.parse_args()

    plan = build_plan(args.mode, args.N, 1.0, 4, s_min=args.s_min)
    print(f"{args.mode}: {len(plan.holes)} holes, radius sum {plan.radius_sum:.6g}")
    series = {}
    for pair in [(0.0, 1.0), (1.0, 2.0), (0.5, 2.5)]:
        label = f"rho=({pair[0]},{pair[1]})"
        for n in args.truncations:
            if n > len(plan.holes):
                continue
            t0 = time.perf_counter()
            res = separation_test(plan, n, *pair)
            dt = time.perf_counter() - t0
            series.setdefault(label, []).append((n, res.residual))
            print(f"{label:16s} n={n:3d}  value={res.observed:.15g}  rel={res.residual:.3e}  {dt:.2f}s")
    path = render_convergence(series, Path(args.out) / "separation.svg")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
