"""Strongly symmetric payoff intervals of random two-state partnerships, and
a block check at the midpoint of each non-degenerate interval.

The block check runs with the parameter inequalities reported but not
enforced; ``failed_bounds`` names the ones that do not hold at n = 4.

Usage: python3 scripts/partnership_sse.py [--count 10] [--seed 0]
"""

import argparse
import random

from wgarbling.apps import make_partnership, random_partnership
from wgarbling.scores import choose_direction, sse_interval, verify_block_construction


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("instance,lower,upper,block_at_midpoint,failed_bounds")
    for k in range(args.count):
        rng = random.Random(args.seed + k)
        game, mon = make_partnership(random_partnership(rng, rng.choice([2, 3]), 2))
        iv = sse_interval(game, mon)
        verdict, failed = ("empty" if iv.empty else "point"), ""
        if not iv.empty and iv.lower < iv.upper:
            width = iv.upper - iv.lower
            Z = (iv.lower + width / 4, iv.upper - width / 4)
            z = (Z[0] + Z[1]) / 2
            rep = verify_block_construction(game, mon, choose_direction(z, Z), z, Z, 4,
                                            "99/100", {1: iv.plus, -1: iv.minus},
                                            enforce_bounds=False)
            verdict = "pass" if rep.passed else "fail"
            failed = ";".join(name for name, holds, _ in rep.bounds if not holds)
        print(f"{k},{iv.lower},{iv.upper},{verdict},\"{failed}\"")


if __name__ == "__main__":
    main()
