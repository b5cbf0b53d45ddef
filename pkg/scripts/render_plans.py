"""Build both default plans and write their TOML and SVG drawings."""
import argparse
from pathlib import Path

from cheese_lab.builder import build_plan, verify_budgets
from cheese_lab.plan_io import write_plan
from cheese_lab.render import render_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=12)
    ap.add_argument("--out", default="out/plans")
    args = ap.parse_args()
    for mode in ("thm14", "thm15"):
        plan = build_plan(mode, args.N, 1.0, 4, s_min=0.05)
        out = Path(args.out)
        write_plan(plan, out / f"{mode}.toml")
        render_plan(plan, out / f"{mode}.svg")
        worst = min(r.relative_margin for nu in (0, 1, 3) for r in verify_budgets(plan, nu).rows)
        skipped = sum(f.status != "placed" for f in plan.families)
        print(f"{mode}: {len(plan.holes)} holes, radius sum {plan.radius_sum:.6g}, "
              f"{skipped} families skipped, smallest relative budget margin {worst:.3g}")


if __name__ == "__main__":
    main()
