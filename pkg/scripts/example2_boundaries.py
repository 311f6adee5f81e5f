"""Sweep eps for the two-state example and locate where each order flips.

Usage: python3 scripts/example2_boundaries.py [--steps 24]
"""

import argparse
from fractions import Fraction as F

from wgarbling.apps import make_example2
from wgarbling.core import joint_kernel
from wgarbling.garbling import (check_expost_garbling, check_joint_garbling,
                                check_strict_weighted_garbling, check_weighted_garbling)


def orders(eps):
    game, mon, mon_p = make_example2(eps)
    p, pp = joint_kernel(game, mon), joint_kernel(game, mon_p)
    return (check_expost_garbling(mon, mon_p).holds, check_joint_garbling(p, pp).holds,
            check_weighted_garbling(p, pp).holds, check_strict_weighted_garbling(p, pp).holds)


def last_true(pred, lo, hi, rounds=20):
    """Bisect a monotone predicate on [lo, hi] that holds at lo."""
    for _ in range(rounds):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if pred(mid) else (lo, mid)
    return lo, hi


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=24)
    args = ap.parse_args()
    print("eps,expost,joint,weighted,strict_weighted")
    for k in range(args.steps + 1):
        eps = F(k, 6 * args.steps)
        print(",".join([str(eps)] + [str(v).lower() for v in orders(eps)]))
    lo, hi = last_true(lambda e: orders(e)[1], F(0), F(1, 6))
    print(f"# joint garbling boundary lies in [{lo}, {hi}] (~{float(lo):.6f})")


if __name__ == "__main__":
    main()
