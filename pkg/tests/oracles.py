"""Independent reference implementations used to cross-check the library.

Everything here is deliberately naive: plain Fraction arithmetic, direct
enumeration, no shared code with the modules under test except the LP
solver where an LP is unavoidable (the constraint family is built
independently).
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from wgarbling.exactlp import LPBuilder, solve

ZERO = Fraction(0)


def gauss_solve(A, b):
    """Unique solution of a square system, or None when singular."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(b[i])] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


def vertex_lp_max(c, A, b):
    """max c.x s.t. A x <= b, x >= 0 by enumerating every basic point.

    Returns None when infeasible.  The caller guarantees boundedness.
    """
    n = len(c)
    rows = [list(r) for r in A] + [[-int(i == j) for j in range(n)] for i in range(n)]
    rhs = list(b) + [0] * n
    best = None
    for basis in itertools.combinations(range(len(rows)), n):
        x = gauss_solve([rows[i] for i in basis], [rhs[i] for i in basis])
        if x is None:
            continue
        if all(sum((a * xi for a, xi in zip(r, x)), ZERO) <= h for r, h in zip(rows, rhs)):
            val = sum((ci * xi for ci, xi in zip(c, x)), ZERO)
            if best is None or val > best:
                best = val
    return best


def stationary_by_substitution(Q):
    """Stationary vector via Gauss elimination on pi (Q - I) = 0, sum pi = 1."""
    n = len(Q)
    A = [[Fraction(Q[s][t]) - (1 if s == t else 0) for s in range(n)] for t in range(n - 1)]
    A.append([Fraction(1)] * n)
    return gauss_solve(A, [0] * (n - 1) + [1])


def reproduces(p_cols, pp_cols, gamma, phi) -> bool:
    """p(c) == sum_c' gamma(c') phi(c | c') p'(c') for every listed profile."""
    for tgt, src in zip(p_cols, pp_cols):
        for c, want in enumerate(tgt):
            got = sum((gamma[cp] * phi[cp][c] * src[cp] for cp in range(len(src))), ZERO)
            if got != want:
                return False
    return True


def brute_force_score(game, mon, lam):
    """max over pure Markov profiles of :func:`brute_force_profile_value`."""
    vals = [brute_force_profile_value(game, mon, lam, choice)
            for choice in itertools.product(range(len(game.profiles)), repeat=len(game.states))]
    vals = [v for v in vals if v is not None]
    return max(vals) if vals else None


def brute_force_profile_value(game, mon, lam, choice):
    """Score LP value for one pure Markov profile, written with the full
    (T, xi, psi) constraint family and no auxiliary variables (None when
    infeasible)."""
    nS, N = len(game.states), len(game.players)
    nY = len(mon.signals)
    lam = [Fraction(v) for v in lam]

    def p(s, a, t, y):
        return game.transition[s][a][t] * mon.law[s][a][t][y]

    def deviations(a):
        for i in range(N):
            for b in range(len(game.actions[i])):
                prof = list(game.profiles[a])
                if prof[i] == b:
                    continue
                prof[i] = b
                yield i, game.profiles.index(tuple(prof))

    lp = LPBuilder("max")
    v = [lp.free(f"v{i}") for i in range(N)]
    x = {(s, t, y, i): lp.free(f"x{s}{t}{y}{i}")
         for s in range(nS) for t in range(nS) for y in range(nY) for i in range(N)}
    for s in range(nS):
        a = choice[s]
        for i in range(N):
            coeffs = {v[i]: 1}
            for t in range(nS):
                for y in range(nY):
                    if p(s, a, t, y):
                        coeffs[x[s, t, y, i]] = -p(s, a, t, y)
            lp.add(coeffs, "==", game.payoff[s][a][i])
        for i, d in deviations(a):
            coeffs = {v[i]: 1}
            for t in range(nS):
                for y in range(nY):
                    if p(s, d, t, y):
                        coeffs[x[s, t, y, i]] = -p(s, d, t, y)
            lp.add(coeffs, ">=", game.payoff[s][d][i])
    for size in range(1, nS + 1):
        for T in itertools.combinations(range(nS), size):
            for image in itertools.permutations(T):
                xi = dict(zip(T, image))
                for sig in itertools.product(range(nY), repeat=size):
                    psi = dict(zip(T, sig))
                    coeffs = {}
                    for s in T:
                        for i in range(N):
                            if lam[i]:
                                key = x[s, xi[s], psi[s], i]
                                coeffs[key] = coeffs.get(key, 0) + lam[i]
                    lp.add(coeffs, "<=", 0)
    lp.objective({v[i]: lam[i] for i in range(N) if lam[i]})
    out = solve(lp.build())
    return out.value if out.optimal else None


def pd_closed_form(eta, g):
    return 2 - 2 * eta * g / (1 - 2 * eta)


def brute_force_pss(game, mon, sign):
    """Pure strongly symmetric score in direction ``sign`` (+1 or -1) by
    enumerating common pure actions per state and the full (T, xi, psi)
    family; scalar promise and player-1 deviations only."""
    nS, N, nY = len(game.states), len(game.players), len(mon.signals)
    B = len(game.actions[0])
    best = None
    for choice in itertools.product(range(B), repeat=nS):
        lp = LPBuilder("max")
        v = lp.free("v")
        x = {(s, t, y): lp.free(f"x{s}{t}{y}")
             for s in range(nS) for t in range(nS) for y in range(nY)}
        for s in range(nS):
            a = game.profiles.index((choice[s],) * N)
            for b in range(B):
                d = game.profiles.index((b,) + (choice[s],) * (N - 1))
                coeffs = {v: 1}
                for t in range(nS):
                    for y in range(nY):
                        pr = game.transition[s][d][t] * mon.law[s][d][t][y]
                        if pr:
                            coeffs[x[s, t, y]] = -pr
                lp.add(coeffs, "==" if d == a else ">=", game.payoff[s][d][0])
        for size in range(1, nS + 1):
            for T in itertools.combinations(range(nS), size):
                for image in itertools.permutations(T):
                    for sig in itertools.product(range(nY), repeat=size):
                        coeffs = {}
                        for s, t, y in zip(T, image, sig):
                            coeffs[x[s, t, y]] = coeffs.get(x[s, t, y], 0) + sign
                        lp.add(coeffs, "<=", 0)
        lp.objective({v: sign})
        out = solve(lp.build())
        if out.optimal and (best is None or out.value > best):
            best = out.value
    return best
