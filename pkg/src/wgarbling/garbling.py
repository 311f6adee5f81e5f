"""Deciders and constructive witnesses for the garbling orders.

All deciders work per state on the linearisation ``psi = gamma * phi``:
the reproduction equations

    p(t, y | s, a) = sum_{t', y'} psi_s(t, y; t', y') p'(t', y' | s, a)

are linear in ``psi >= 0``.  A feasible ``psi`` is split back into weights
``gamma_s(t', y') = sum_{t, y} psi_s(t, y; t', y')`` and channels
``phi = psi / gamma`` (uniform on the support when ``gamma = 0``).

Columns of a kernel are the (t, y) pairs in row-major order, so a channel
block is a small dense matrix ``channel[c'][c]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import JointKernel, MonitoringStructure, StochasticGame
from .exactlp import LPBuilder, solve

ZERO = Fraction(0)
ONE = Fraction(1)


class GarblingInputError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelBlock:
    """Weights over source columns and one channel row per source column."""

    weights: tuple  # gamma[c']
    channel: tuple  # channel[c'][c] = phi(c | c')

    def psi(self) -> list:
        return [[g * v for v in row] for g, row in zip(self.weights, self.channel)]

    def max_weight(self) -> Fraction:
        return max(self.weights) if self.weights else ZERO


@dataclass(frozen=True)
class GarblingWitness:
    """Blocks keyed by state, or by (state, target profile) for P-weighted checks."""

    blocks: dict

    def block(self, key) -> ChannelBlock:
        return self.blocks[key]


@dataclass(frozen=True)
class GarblingVerdict:
    holds: bool
    witness: Optional[GarblingWitness] = None
    farkas: dict = field(default_factory=dict)  # key -> Farkas multipliers
    support: dict = field(default_factory=dict)  # key -> common support (strict only)
    reason: str = ""
    channels: dict = field(default_factory=dict)  # (s, t) -> signal channel (ex-post)

    def __bool__(self) -> bool:
        return self.holds


# ---------------------------------------------------------------------------
# the per-block linear program


def _uniform(n: int, support=None) -> tuple:
    if support is None:
        support = range(n)
    support = list(support)
    row = [ZERO] * n
    for c in support:
        row[c] = Fraction(1, len(support))
    return tuple(row)


def _decompose(psi: list, ntarget: int, support=None) -> ChannelBlock:
    """psi[c'][c] -> (gamma, phi) with uniform rows where gamma = 0."""
    weights, channel = [], []
    for col in psi:
        g = sum(col, ZERO)
        weights.append(g)
        if g:
            channel.append(tuple(v / g for v in col))
        else:
            channel.append(_uniform(ntarget, support))
    return ChannelBlock(tuple(weights), tuple(channel))


def _block_lp(target: Sequence[Sequence[Fraction]], source: Sequence[Sequence[Fraction]],
              joint: bool = False, rows_allowed=None, cols_allowed=None):
    """LP whose feasible set is every psi reproducing ``target`` from ``source``.

    ``target[k]`` and ``source[k]`` are the distributions under the k-th
    action profile considered.  Entries outside ``rows_allowed x cols_allowed``
    are fixed to zero (by omission).
    """
    nt, ns = len(target[0]), len(source[0])
    rows = range(nt) if rows_allowed is None else sorted(rows_allowed)
    cols = range(ns) if cols_allowed is None else sorted(cols_allowed)
    b = LPBuilder("feasibility")
    var = {}
    for cp in cols:
        for c in rows:
            var[c, cp] = b.var(f"psi[{c},{cp}]")
    for k, (tgt, src) in enumerate(zip(target, source)):
        for c in range(nt):
            coeffs = {}
            for cp in cols:
                if src[cp] and (c, cp) in var:
                    coeffs[var[c, cp]] = src[cp]
            b.add(coeffs, "==", tgt[c], name=f"reproduce[a{k},{c}]")
    if joint:
        for cp in range(ns):
            coeffs = {var[c, cp]: 1 for c in rows if (c, cp) in var}
            b.add(coeffs, "==", 1, name=f"stochastic[{cp}]")
    return b, var


def _psi_from(var: dict, x, nt: int, ns: int) -> list:
    psi = [[ZERO] * nt for _ in range(ns)]
    for (c, cp), j in var.items():
        psi[cp][c] = x[j]
    return psi


def _solve_block(target, source, joint=False):
    b, var = _block_lp(target, source, joint)
    problem = b.build()
    out = solve(problem)
    if not out.feasible:
        return None, out.farkas
    psi = _psi_from(var, out.primal, len(target[0]), len(source[0]))
    return _decompose(psi, len(target[0])), None


def _strict_block(target, source):
    """Strict search: a psi whose nonzero columns are positive exactly on U.

    U is the union of the supports of the target rows, which reproduction
    forces to be the common support.  Columns are pruned until every
    surviving column can be made positive on all of U simultaneously.
    """
    nt, ns = len(target[0]), len(source[0])
    U = [c for c in range(nt) if any(row[c] for row in target)]
    active = {cp for cp in range(ns) if any(row[cp] for row in source)}
    while True:
        if not active:
            return None, None, ("no common support: every source column is forced to vanish "
                                "somewhere on the support of p")
        b, var = _block_lp(target, source, False, U, active)
        base = b.build()
        first = solve(base)
        if not first.feasible:
            return None, first.farkas, "reproduction infeasible on the remaining columns"
        points = [first.primal]
        positive = {e for e, j in var.items() if first.primal[j] > 0}
        while True:
            unknown = [e for e in var if e not in positive]
            if not unknown:
                break
            b2, var2 = _block_lp(target, source, False, U, active)
            mu = {}
            for e in unknown:
                mu[e] = b2.var(f"mu[{e}]", 0, 1)
                b2.add({mu[e]: 1, var2[e]: -1}, "<=", 0)
            b2.sense = "max"
            b2.objective({j: 1 for j in mu.values()})
            out = solve(b2.build())
            if not out.optimal or out.value == 0:
                break
            points.append(out.primal)
            positive |= {e for e in unknown if out.primal[var2[e]] > 0}
        full = {cp for cp in active if all((c, cp) in positive for c in U)}
        dead = {cp for cp in active if not any((c, cp) in positive for c in U)}
        if full | dead == active and full:
            avg = [sum((pt[j] for pt in points), ZERO) / len(points) for j in range(len(points[0]))]
            psi = _psi_from(var, avg, nt, ns)
            for cp in dead:
                for c in U:
                    psi[cp][c] = ZERO
            return _decompose(psi, nt, U), None, ""
        active = full


def _verdict(blocks, farkas, support=None, reason="", channels=None) -> GarblingVerdict:
    if farkas or reason:
        reason = reason or "infeasible at " + ", ".join(
            f"block {k}" for k in sorted(farkas, key=str))
        return GarblingVerdict(False, None, farkas, support or {}, reason)
    return GarblingVerdict(True, GarblingWitness(blocks), {}, support or {}, "",
                           channels or {})


def _check_same_shape(p: JointKernel, pp: JointKernel) -> None:
    if len(p.states) != len(pp.states):
        raise GarblingInputError("kernels have different state sets")
    if p.n_profiles != pp.n_profiles:
        raise GarblingInputError("kernels have different action profile sets")


def _rows(kernel: JointKernel, s: int, profiles) -> list:
    return [kernel.column(s, a) for a in profiles]


# ---------------------------------------------------------------------------
# deciders


def check_weighted_garbling(p: JointKernel, pp: JointKernel) -> GarblingVerdict:
    """Is ``p`` a weighted garbling of ``pp``?"""
    _check_same_shape(p, pp)
    blocks, farkas = {}, {}
    profiles = range(p.n_profiles)
    for s in range(len(p.states)):
        blk, cert = _solve_block(_rows(p, s, profiles), _rows(pp, s, profiles))
        if blk is None:
            farkas[s] = cert
        else:
            blocks[s] = blk
    return _verdict(blocks, farkas)


def check_joint_garbling(p: JointKernel, pp: JointKernel) -> GarblingVerdict:
    """Is ``p`` a joint (standard) garbling of ``pp``?  Weights are all 1."""
    _check_same_shape(p, pp)
    blocks, farkas = {}, {}
    profiles = range(p.n_profiles)
    for s in range(len(p.states)):
        blk, cert = _solve_block(_rows(p, s, profiles), _rows(pp, s, profiles), joint=True)
        if blk is None:
            farkas[s] = cert
        else:
            blocks[s] = blk
    return _verdict(blocks, farkas)


def check_strict_weighted_garbling(p: JointKernel, pp: JointKernel) -> GarblingVerdict:
    """Weighted garbling whose channels share one support per state."""
    _check_same_shape(p, pp)
    blocks, farkas, support = {}, {}, {}
    reasons = []
    profiles = range(p.n_profiles)
    cols = p.columns()
    for s in range(len(p.states)):
        blk, cert, why = _strict_block(_rows(p, s, profiles), _rows(pp, s, profiles))
        if blk is None:
            if cert is not None:
                farkas[s] = cert
            reasons.append(f"state {p.states[s]}: {why}")
        else:
            blocks[s] = blk
            support[s] = tuple(cols[c] for c in range(len(cols))
                               if blk.channel[0][c] > 0)
    return _verdict(blocks, farkas, support, "; ".join(reasons))


def check_p_weighted_garbling(p: JointKernel, pp: JointKernel, targets: Sequence[int],
                              deviation_map, strict: bool = False) -> GarblingVerdict:
    """Weighted garbling required only across A(a) for each target profile a.

    ``deviation_map(a)`` (or ``deviation_map[a]``) lists the profiles A(a).
    Blocks and certificates are keyed by (state, target).
    """
    _check_same_shape(p, pp)
    lookup = deviation_map if callable(deviation_map) else deviation_map.__getitem__
    blocks, farkas, support = {}, {}, {}
    reasons = []
    cols = p.columns()
    for s in range(len(p.states)):
        for a in targets:
            group = list(lookup(a))
            if a not in group:
                group = [a] + group
            tgt, src = _rows(p, s, group), _rows(pp, s, group)
            if strict:
                blk, cert, why = _strict_block(tgt, src)
            else:
                (blk, cert), why = _solve_block(tgt, src), "infeasible"
            if blk is None:
                if cert is not None:
                    farkas[s, a] = cert
                reasons.append(f"(state {p.states[s]}, target {a}): {why}")
            else:
                blocks[s, a] = blk
                if strict:
                    support[s, a] = tuple(cols[c] for c in range(len(cols))
                                          if blk.channel[0][c] > 0)
    return _verdict(blocks, farkas, support, "; ".join(reasons))


def check_conditional_wg(f_rows: Sequence[Sequence[Fraction]],
                         fp_rows: Sequence[Sequence[Fraction]]) -> GarblingVerdict:
    """Is the signal law ``f_rows[a][y]`` a weighted garbling of ``fp_rows[a][y']``?

    Both are conditional laws at fixed (s, t) and (s', t'); the witness has
    a single block keyed by 0 with weights over y' and channels over y.
    """
    if len(f_rows) != len(fp_rows):
        raise GarblingInputError("conditional laws have different action sets")
    blk, cert = _solve_block(f_rows, fp_rows)
    if blk is None:
        return GarblingVerdict(False, farkas={0: cert})
    return GarblingVerdict(True, GarblingWitness({0: blk}))


def conditional_rows(mon: MonitoringStructure, s: int, t: int) -> list:
    """f(. | t, s, a) for every profile a."""
    return [list(mon.law[s][a][t]) for a in range(len(mon.law[s]))]


def check_expost_garbling(mon: MonitoringStructure, mon_p: MonitoringStructure) -> GarblingVerdict:
    """Per (s, t) signal channel reproducing f from f' across all profiles.

    On success the witness is the lifted joint witness with gamma = 1 and
    phi_s(t, y | t', y') = 1[t = t'] phi_{s,t}(y | y').
    """
    nS = len(mon.law)
    if nS != len(mon_p.law) or len(mon.law[0]) != len(mon_p.law[0]):
        raise GarblingInputError("monitoring structures over different games")
    nY, nYp = len(mon.signals), len(mon_p.signals)
    blocks, farkas, channels = {}, {}, {}
    for s in range(nS):
        chan_s = {}
        for t in range(nS):
            blk, cert = _solve_block(conditional_rows(mon, s, t), conditional_rows(mon_p, s, t),
                                     joint=True)
            if blk is None:
                farkas[s, t] = cert
            else:
                chan_s[t] = blk.channel
                channels[s, t] = blk.channel
        if len(chan_s) == nS:
            rows = []
            for tp in range(nS):
                for yp in range(nYp):
                    row = [ZERO] * (nS * nY)
                    for y in range(nY):
                        row[tp * nY + y] = chan_s[tp][yp][y]
                    rows.append(tuple(row))
            blocks[s] = ChannelBlock(tuple([ONE] * (nS * nYp)), tuple(rows))
    return _verdict(blocks, farkas, channels=channels)


# ---------------------------------------------------------------------------
# witness checks and algebra


def witness_violations(p: JointKernel, pp: JointKernel, witness: GarblingWitness,
                       profiles_for=None, joint: bool = False,
                       common_support: bool = False) -> list:
    """Every failed invariant of ``witness`` by exact substitution.

    Keys of the witness are states, or (state, target) pairs; in the latter
    case ``profiles_for(key)`` gives the profiles the block must reproduce.
    """
    out = []
    for key, blk in witness.blocks.items():
        s = key[0] if isinstance(key, tuple) else key
        group = profiles_for(key) if profiles_for else range(p.n_profiles)
        if any(g < 0 for g in blk.weights):
            out.append(f"{key}: negative weight")
        for cp, row in enumerate(blk.channel):
            if any(v < 0 for v in row):
                out.append(f"{key}: negative channel entry at column {cp}")
            if sum(row) != 1:
                out.append(f"{key}: channel row {cp} sums to {sum(row)}")
        if joint and any(g != 1 for g in blk.weights):
            out.append(f"{key}: weights are not all 1")
        if common_support:
            supports = {tuple(v > 0 for v in row) for row in blk.channel}
            if len(supports) != 1:
                out.append(f"{key}: channels do not share a common support")
        psi = blk.psi()
        for a in group:
            src = pp.column(s, a)
            tgt = p.column(s, a)
            norm = sum((g * v for g, v in zip(blk.weights, src)), ZERO)
            if norm != 1:
                out.append(f"{key}: weight normalisation gives {norm} at profile {a}")
            for c, want in enumerate(tgt):
                got = sum((psi[cp][c] * src[cp] for cp in range(len(src))), ZERO)
                if got != want:
                    out.append(f"{key}: reproduction fails at profile {a}, column {c}: "
                               f"{got} != {want}")
    return out


def compose_witnesses(w12: GarblingWitness, w23: GarblingWitness) -> GarblingWitness:
    """p1 from p2 and p2 from p3 give p1 from p3 via psi13 = psi12 o psi23."""
    blocks = {}
    for key, b12 in w12.blocks.items():
        b23 = w23.blocks[key]
        psi12, psi23 = b12.psi(), b23.psi()
        n1 = len(psi12[0])
        psi13 = []
        for cpp in range(len(psi23)):
            col = [ZERO] * n1
            for cp, weight in enumerate(psi23[cpp]):
                if weight:
                    for c in range(n1):
                        col[c] += psi12[cp][c] * weight
            psi13.append(col)
        blocks[key] = _decompose(psi13, n1)
    return GarblingWitness(blocks)


def witness_from_example(kernel_cols: int, weights: Sequence[Fraction],
                         channel: Sequence[Sequence[Fraction]], states) -> GarblingWitness:
    """Replicate one hand-written block at every state."""
    blk = ChannelBlock(tuple(weights), tuple(tuple(r) for r in channel))
    return GarblingWitness({s: blk for s in range(len(states))})


# ---------------------------------------------------------------------------
# constructive witness from conditional comparisons


def build_prop1_witness(game: StochasticGame, mon: MonitoringStructure,
                        mon_p: MonitoringStructure, T, conditional: Optional[dict] = None
                        ) -> GarblingWitness:
    """Weighted-garbling witness assembled from per-(s, t) conditional witnesses.

    ``T[s][t]`` is the next state whose f' conditional law is compared with
    f at (s, t).  ``conditional[(s, t)]`` is a :class:`ChannelBlock` with
    weights over Y' and channel rows over Y; missing entries are found by
    :func:`check_conditional_wg`.
    """
    if not game.is_action_independent():
        raise GarblingInputError("transition law must be action independent")
    nS, nY, nYp = game.n_states, len(mon.signals), len(mon_p.signals)
    conditional = dict(conditional or {})
    blocks = {}
    for s in range(nS):
        q = game.transition[s][0]
        supp = [t for t in range(nS) if q[t] > 0]
        for t in supp:
            if q[T[s][t]] == 0:
                raise GarblingInputError(
                    f"T maps ({game.states[s]}, {game.states[t]}) outside the support")
            rows, rows_p = conditional_rows(mon, s, t), conditional_rows(mon_p, s, T[s][t])
            if (s, t) not in conditional:
                v = check_conditional_wg(rows, rows_p)
                if not v.holds:
                    raise GarblingInputError(
                        f"no conditional witness at ({game.states[s]}, {game.states[t]})")
                conditional[s, t] = v.witness.block(0)
            blk = conditional[s, t]
            bad = witness_violations(
                JointKernel(("_",), mon.signals, len(rows), [[[r] for r in rows]]),
                JointKernel(("_",), mon_p.signals, len(rows_p), [[[r] for r in rows_p]]),
                GarblingWitness({0: blk}))
            if bad:
                raise GarblingInputError(
                    f"conditional witness at ({game.states[s]}, {game.states[t]}) fails: {bad[0]}")
        weights, channel = [], []
        for tp in range(nS):
            pre = [t for t in supp if T[s][t] == tp]
            for yp in range(nYp):
                mass = sum((conditional[s, t].weights[yp] * q[t] for t in pre), ZERO)
                if not pre or q[tp] == 0 or mass == 0:
                    weights.append(ZERO if q[tp] == 0 or not pre else mass / q[tp])
                    channel.append(_uniform(nS * nY))
                    continue
                weights.append(mass / q[tp])
                row = [ZERO] * (nS * nY)
                for t in pre:
                    g = conditional[s, t].weights[yp]
                    for y in range(nY):
                        row[t * nY + y] = g * conditional[s, t].channel[yp][y] * q[t] / mass
                channel.append(tuple(row))
        blocks[s] = ChannelBlock(tuple(weights), tuple(channel))
    return GarblingWitness(blocks)


# ---------------------------------------------------------------------------
# likelihood ratios for effort-count games


INF = math.inf


@dataclass(frozen=True)
class RatioInterval:
    lo: object  # Fraction or math.inf
    hi: object
    argmin: tuple  # (t, y)
    argmax: tuple


@dataclass(frozen=True)
class LikelihoodRatioProfile:
    """intervals[(s, k)] for k in {1, N}."""

    intervals: dict
    n_players: int


def _ratio(num: Fraction, den: Fraction):
    if den == 0:
        return ONE if num == 0 else INF
    return num / den


def effort_profile(game: StochasticGame, k: int, effort_action: int = 0) -> int:
    """Profile in which the first ``k`` players exert effort."""
    shirk = 1 - effort_action
    return game.profile_index([effort_action if i < k else shirk
                               for i in range(game.n_players)])


def likelihood_profile(game: StochasticGame, kernel: JointKernel,
                       effort_action: int = 0) -> LikelihoodRatioProfile:
    N = game.n_players
    cols = kernel.columns()
    intervals = {}
    for s in range(len(kernel.states)):
        for k in sorted({1, N}):
            hi_col = kernel.column(s, effort_profile(game, k, effort_action))
            lo_col = kernel.column(s, effort_profile(game, k - 1, effort_action))
            ratios = [_ratio(a, b) for a, b in zip(hi_col, lo_col)]
            lo = min(ratios)
            hi = max(ratios)
            intervals[s, k] = RatioInterval(lo, hi, cols[ratios.index(lo)], cols[ratios.index(hi)])
    return LikelihoodRatioProfile(intervals, N)


@dataclass(frozen=True)
class RatioComparison:
    holds: bool
    per_key: dict  # (s, k) -> bool
    witness: Optional[GarblingWitness] = None


def check_strictwg_by_ratios(profile: LikelihoodRatioProfile, profile_p: LikelihoodRatioProfile,
                             game: Optional[StochasticGame] = None,
                             kernel: Optional[JointKernel] = None,
                             kernel_p: Optional[JointKernel] = None,
                             effort_action: int = 0) -> RatioComparison:
    """Strict interval containment ``[lo, hi]`` inside ``(lo', hi')`` at every (s, k).

    When it holds and the kernels are supplied, the two-point witness is
    built for targets "everyone works" and "nobody works".
    """
    if set(profile.intervals) != set(profile_p.intervals):
        raise GarblingInputError("profiles over different states")
    per = {}
    for key, iv in profile.intervals.items():
        ivp = profile_p.intervals[key]
        per[key] = ivp.lo < iv.lo and iv.hi < ivp.hi
    holds = all(per.values())
    witness = None
    if holds and kernel is not None and kernel_p is not None and game is not None:
        witness = _two_point_witness(game, kernel, kernel_p, profile_p, effort_action)
    return RatioComparison(holds, per, witness)


def _two_point_witness(game, kernel, kernel_p, profile_p, effort_action) -> GarblingWitness:
    N = game.n_players
    blocks = {}
    for s in range(len(kernel.states)):
        for k, target_count in ((N, N), (1, 0)):
            target = effort_profile(game, target_count, effort_action)
            up = kernel_p.column(s, effort_profile(game, k, effort_action))
            down = kernel_p.column(s, effort_profile(game, k - 1, effort_action))
            cols = kernel_p.columns()
            iv = profile_p.intervals[s, k]
            cbar, cund = cols.index(iv.argmax), cols.index(iv.argmin)
            # gbar * up[cbar] + gund * up[cund] = 1 and likewise for down
            det = up[cbar] * down[cund] - up[cund] * down[cbar]
            gbar = (down[cund] - up[cund]) / det
            gund = (up[cbar] - down[cbar]) / det
            a_up, b_up = gbar * up[cbar], gund * up[cund]
            a_dn, b_dn = gbar * down[cbar], gund * down[cund]
            p_up = kernel.column(s, effort_profile(game, k, effort_action))
            p_dn = kernel.column(s, effort_profile(game, k - 1, effort_action))
            d2 = a_up * b_dn - b_up * a_dn
            nt = len(p_up)
            top, bottom = [ZERO] * nt, [ZERO] * nt
            for c in range(nt):
                top[c] = (p_up[c] * b_dn - b_up * p_dn[c]) / d2
                bottom[c] = (a_up * p_dn[c] - a_dn * p_up[c]) / d2
            support = [c for c in range(nt) if p_up[c] or p_dn[c]]
            weights = [ZERO] * len(up)
            channel = [_uniform(nt, support)] * len(up)
            weights[cbar], weights[cund] = gbar, gund
            channel[cbar], channel[cund] = tuple(top), tuple(bottom)
            blocks[s, target] = ChannelBlock(tuple(weights), tuple(channel))
    return GarblingWitness(blocks)
