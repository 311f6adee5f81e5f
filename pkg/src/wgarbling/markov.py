"""Markov-chain utilities over exact rationals.

Transition tables use the game layout ``q[s][a][t]``; a pure Markov profile
is a tuple ``(a_s)_s`` of profile indices, one per state.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import flint

from .core import JointKernel, StochasticGame, profile_weights
from .exactlp import LPBuilder, solve

ZERO = Fraction(0)


class PreconditionError(ValueError):
    pass


def _to_fmpq_mat(rows) -> flint.fmpq_mat:
    m, n = len(rows), len(rows[0])
    return flint.fmpq_mat(m, n, [flint.fmpq(v.numerator, v.denominator)
                                 for r in rows for v in r])


def _fraction(x) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def chain_matrix(q, profile: Sequence[int]) -> list:
    """Q[s][t] = q(t | s, a_s)."""
    return [list(q[s][profile[s]]) for s in range(len(q))]


def stationary(Q: Sequence[Sequence[Fraction]]) -> Optional[tuple]:
    """Unique pi with pi^T Q = pi^T and sum 1, or None when not unique."""
    n = len(Q)
    A = [[Q[s][t] - (1 if s == t else 0) for s in range(n)] for t in range(n)]
    if _to_fmpq_mat(A).rank() != n - 1:
        return None
    rows = A + [[Fraction(1)] * n]
    M = _to_fmpq_mat(rows)
    if M.rank() < n:
        return None  # the null vector sums to zero
    rhs = flint.fmpq_mat(n + 1, 1, [0] * n + [1])
    # full column rank, consistent system: solve the normal equations exactly
    Mt = M.transpose()
    sol = (Mt * M).solve(Mt * rhs)
    return tuple(_fraction(sol[s, 0]) for s in range(n))


def invariant_distribution(q, profile: Sequence[int]) -> Optional[tuple]:
    return stationary(chain_matrix(q, profile))


def pure_markov_profiles(q) -> itertools.product:
    return itertools.product(*(range(len(q[s])) for s in range(len(q))))


def is_strongly_connected(Q) -> bool:
    n = len(Q)

    def reach(adj) -> set:
        seen, todo = {0}, deque([0])
        while todo:
            u = todo.popleft()
            for v in range(n):
                if adj(u, v) and v not in seen:
                    seen.add(v)
                    todo.append(v)
        return seen

    return (len(reach(lambda u, v: Q[u][v] > 0)) == n
            and len(reach(lambda u, v: Q[v][u] > 0)) == n)


def check_irreducible_all_pure_profiles(q):
    """(True, None) or (False, first profile whose chain is reducible)."""
    for prof in pure_markov_profiles(q):
        if not is_strongly_connected(chain_matrix(q, prof)):
            return False, prof
    return True, None


@dataclass(frozen=True)
class InvariantComparison:
    same: bool
    profile: Optional[tuple] = None
    reason: str = ""


def check_same_invariants(q, q_p) -> InvariantComparison:
    if len(q) != len(q_p) or any(len(q[s]) != len(q_p[s]) for s in range(len(q))):
        raise PreconditionError("transition laws over different games")
    for prof in pure_markov_profiles(q):
        Q, Qp = chain_matrix(q, prof), chain_matrix(q_p, prof)
        if not is_strongly_connected(Q):
            return InvariantComparison(False, prof, "q is reducible under this profile")
        if not is_strongly_connected(Qp):
            return InvariantComparison(False, prof, "q' is reducible under this profile")
        if stationary(Q) != stationary(Qp):
            return InvariantComparison(False, prof, "invariant distributions differ")
    return InvariantComparison(True)


def lazy(q) -> list:
    """q' = (q + I) / 2 per (s, a)."""
    return [[[(v + (1 if s == t else 0)) / 2 for t, v in enumerate(row)] for row in q[s]]
            for s in range(len(q))]


# ---------------------------------------------------------------------------
# extended (signed) Markov strategies


def extended_matrix(q, alpha) -> list:
    """M[s][t] = sum_a alpha_s(a) q(t | s, a)."""
    n = len(q)
    out = []
    for s in range(n):
        row = [ZERO] * n
        for a, w in enumerate(alpha[s]):
            if w:
                for t in range(n):
                    row[t] += w * q[s][a][t]
        out.append(row)
    return out


def invariance_residual(q, alpha, beta) -> list:
    """sum_s beta_s M[s][t] - beta_t for each t."""
    M = extended_matrix(q, alpha)
    n = len(q)
    return [sum((beta[s] * M[s][t] for s in range(n)), ZERO) - beta[t] for t in range(n)]


def signed_invariant(q, alpha) -> Optional[tuple]:
    """beta with sum 1 invariant under (alpha, q), if unique."""
    return stationary(extended_matrix(q, alpha))


def verify_invariance_transfer(q, q_p, alpha, beta) -> Optional[int]:
    """Returns None when beta is invariant under (alpha, q'), else the first
    state t where the invariance equation fails."""
    for s, row in enumerate(alpha):
        if sum(row, ZERO) != 1:
            raise PreconditionError(f"extended strategy at state {s} does not sum to 1")
    if any(invariance_residual(q, alpha, beta)):
        raise PreconditionError("beta is not invariant under (alpha, q)")
    cmp = check_same_invariants(q, q_p)
    if not cmp.same:
        raise PreconditionError(f"q and q' fail the same-invariants check at "
                                f"{cmp.profile}: {cmp.reason}")
    for t, r in enumerate(invariance_residual(q_p, alpha, beta)):
        if r:
            return t
    return None


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    violation: Optional[tuple] = None  # (state, player, deviation mixture, gain)


def check_admissible(game: StochasticGame, kernel: JointKernel, profile) -> AdmissibilityReport:
    """``profile[s][i]`` is player i's mixture at state s (a pure action may be
    given as an int)."""
    nS, N = game.n_states, game.n_players
    mixes = []
    for s in range(nS):
        per = []
        for i in range(N):
            m = profile[s][i]
            if isinstance(m, int):
                m = [Fraction(int(b == m)) for b in range(len(game.actions[i]))]
            per.append([Fraction(v) for v in m])
        mixes.append(per)
    for s in range(nS):
        base_w = profile_weights(game, mixes[s])
        base_p = kernel.mix(s, base_w)
        for i in range(N):
            base_u = sum((w * game.payoff[s][a][i] for a, w in enumerate(base_w)), ZERO)
            nb = len(game.actions[i])
            cols, utils = [], []
            for b in range(nb):
                dev = list(mixes[s])
                dev[i] = [Fraction(int(j == b)) for j in range(nb)]
                w = profile_weights(game, dev)
                cols.append(kernel.mix(s, w))
                utils.append(sum((wa * game.payoff[s][a][i] for a, wa in enumerate(w)), ZERO))
            lp = LPBuilder("max")
            x = [lp.var(f"dev[{b}]") for b in range(nb)]
            lp.add({x[b]: 1 for b in range(nb)}, "==", 1)
            for c, target in enumerate(base_p):
                lp.add({x[b]: cols[b][c] for b in range(nb)}, "==", target)
            lp.objective({x[b]: utils[b] for b in range(nb)})
            out = solve(lp.build())
            if out.optimal and out.value > base_u:
                return AdmissibilityReport(False, (s, i, tuple(out.primal), out.value - base_u))
    return AdmissibilityReport(True)


def simple_cycles(n: int) -> list:
    """Every simple cycle of the complete digraph on ``range(n)``, self-loops
    included, each listed once with its smallest vertex first."""
    out = []
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            head, rest = subset[0], subset[1:]
            for perm in itertools.permutations(rest):
                out.append((head,) + perm)
    return out


def cycle_edges(cycle: Sequence[int]) -> list:
    return [(cycle[k], cycle[(k + 1) % len(cycle)]) for k in range(len(cycle))]
