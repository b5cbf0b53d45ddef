"""Excluded boundary length of the Lambda construction: closed form against sampling.

Compares plain Monte Carlo with jittered stratified sampling at several sample sizes.
"""
import argparse
import math

import numpy as np

from cheese_lab.builder import build_plan


def excluded_mask(plan, theta):
    z = np.exp(1j * theta)
    out = np.zeros(theta.shape, dtype=bool)
    for c in plan.covers:
        g = plan.gammas.get(c.index)
        if g is not None:
            d = np.abs(z - c.disc.center)
            out |= (d > c.disc.radius - g) & (d < c.disc.radius + g)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    plan = build_plan("thm15", args.N, 1.0, 4, s_min=0.05)
    lam = plan.lambda_set
    print(f"{len(lam.arcs)} arcs, excluded length {lam.excluded_length:.12f} (r = {plan.r})")
    rng = np.random.default_rng(args.seed)
    for n in (10 ** 4, 10 ** 5, 10 ** 6):
        plain = 2 * math.pi * excluded_mask(plan, 2 * math.pi * rng.random(n)).mean()
        strat = 2 * math.pi * excluded_mask(plan, 2 * math.pi * (np.arange(n) + rng.random(n)) / n).mean()
        print(f"n={n:>8d}  plain {plain:.6f} ({plain - lam.excluded_length:+.2e})"
              f"  stratified {strat:.6f} ({strat - lam.excluded_length:+.2e})")


if __name__ == "__main__":
    main()
