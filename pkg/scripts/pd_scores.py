"""Scores of the noisy repeated PD in direction (1, 1) against the closed form.

The closed form describes the cooperative optimum; once eta is large enough
that cooperation cannot be enforced, the score falls to the stage-Nash value
and the two columns part ways.

Usage: python3 scripts/pd_scores.py [--g 1/2] [--l 1/4]
"""

import argparse
from fractions import Fraction as F

from wgarbling.apps import make_pd, pd_noisy_monitor
from wgarbling.scores import ScoreProgramSpec, solve_score


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--g", type=F, default=F(1, 2))
    ap.add_argument("--l", type=F, default=F(1, 4))
    args = ap.parse_args()
    game = make_pd(args.g, args.l)
    print("eta,k,closed_form,profile")
    for k in range(1, 12):
        eta = F(k, 24)
        sol = solve_score(game, pd_noisy_monitor(game, eta), ScoreProgramSpec((1, 1)))
        closed = 2 - 2 * eta * args.g / (1 - 2 * eta)
        label = ";".join(game.profile_label(a) for a in sol.profile)
        print(f"{eta},{sol.k},{closed},{label}")


if __name__ == "__main__":
    main()
