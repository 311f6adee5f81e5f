"""Limit score programs, payoff polygons, essentiality and block checks.

The score program in direction ``lam`` maximises ``lam . v`` over Markov
profiles ``alpha`` and increments ``x_s(t, y)`` subject to

* promise keeping  ``v = u(alpha_s, s) + sum_{t,y} x_s(t,y) p(t,y|s,alpha_s)``
* incentive constraints for every unilateral pure deviation
* the cycle condition ``lam . sum_{s in T} x_s(xi(s), psi(s)) <= 0``.

The cycle family is reduced exactly: with ``l_s(t) = max_y lam . x_s(t,y)``
it is equivalent to ``sum l <= 0`` along every simple cycle of the complete
digraph on states (self-loops included), which is linearised with auxiliary
variables ``m_s(t) >= lam . x_s(t, y)``.

Profiles are searched in decreasing order of an exact upper bound (see
:func:`profile_bound`), so most profiles never need an LP.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import (JointKernel, MonitoringStructure, StochasticGame, joint_kernel,
                   profile_weights, symmetric_weights, symmetrize_check)
from .exactlp import LPBuilder, RationalLPProblem, solve
from .markov import cycle_edges, simple_cycles, stationary

ZERO = Fraction(0)
MODES = ("general", "ss", "pss")


class ScoreError(ValueError):
    pass


@dataclass(frozen=True)
class ScoreProgramSpec:
    direction: tuple
    mode: str = "general"
    grid: Optional[tuple] = None  # symmetric mixtures over B (ss mode)

    def __post_init__(self):
        object.__setattr__(self, "direction", tuple(Fraction(v) for v in self.direction))
        if self.mode not in MODES:
            raise ScoreError(f"unknown mode {self.mode!r}")
        if not any(self.direction):
            raise ScoreError("direction must be nonzero")
        if self.mode != "general" and (len(self.direction) != 1
                                       or abs(self.direction[0]) != 1):
            raise ScoreError("symmetric programs take direction +1 or -1")
        if self.grid is not None:
            grid = tuple(tuple(Fraction(v) for v in mix) for mix in self.grid)
            for mix in grid:
                if sum(mix) != 1 or any(v < 0 for v in mix):
                    raise ScoreError(f"grid point {mix} is not a distribution")
            object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class ScoreSolution:
    """Optimal (pure-restricted) score and a certifying feasible point.

    ``k`` is None when no profile in the domain admits a feasible point
    (the score is minus infinity).  In the symmetric modes ``v`` and every
    increment are 1-tuples.
    """

    spec: ScoreProgramSpec
    k: Optional[Fraction]
    profile: Optional[tuple] = None  # per state: profile index / action / mixture
    weights: Optional[tuple] = None  # per state: weights over pure profiles
    v: Optional[tuple] = None
    x: dict = field(default_factory=dict)  # (s, t, y) -> tuple
    m: dict = field(default_factory=dict)  # (s, t) -> Fraction
    binding_cycles: tuple = ()
    optimal_profiles: tuple = ()
    lp_solved: int = 0
    note: str = "pure-restricted"

    @property
    def feasible(self) -> bool:
        return self.k is not None

    def ell(self) -> dict:
        """l_s(t) = max_y lam . x_s(t, y)."""
        lam = self.spec.direction
        out = {}
        for (s, t, y), vec in self.x.items():
            val = _dot(lam, vec)
            if (s, t) not in out or val > out[s, t]:
                out[s, t] = val
        return out


def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), ZERO)


# ---------------------------------------------------------------------------
# action domains


def _domain(game: StochasticGame, spec: ScoreProgramSpec):
    """Per-state lists of (label, weights) choices."""
    nS = game.n_states
    if spec.mode == "general":
        per = [(a, tuple(Fraction(int(b == a)) for b in range(len(game.profiles))))
               for a in range(len(game.profiles))]
        return [per] * nS
    B = len(game.actions[0])
    if spec.mode == "pss":
        per = [(b, tuple(symmetric_weights(game, [Fraction(int(j == b)) for j in range(B)])))
               for b in range(B)]
        return [per] * nS
    grid = spec.grid
    if grid is None:
        grid = tuple(tuple(Fraction(int(j == b)) for j in range(B)) for b in range(B))
    per = [(mix, tuple(symmetric_weights(game, mix))) for mix in grid]
    return [per] * nS


def _deviations(game: StochasticGame, spec: ScoreProgramSpec, choice, weights):
    """(component, deviation weights) pairs for the incentive constraints."""
    out = []
    if spec.mode == "general":
        prof = game.profiles[choice]
        for i in range(game.n_players):
            for b in range(len(game.actions[i])):
                if b != prof[i]:
                    out.append((i, profile_weights(game, [
                        [Fraction(int(j == (b if pl == i else prof[pl])))
                         for j in range(len(game.actions[pl]))]
                        for pl in range(game.n_players)])))
        return out
    mix = choice if spec.mode == "ss" else tuple(
        Fraction(int(j == choice)) for j in range(len(game.actions[0])))
    for b in range(len(game.actions[0])):
        dev = symmetric_weights(game, mix, deviator_action=b)
        if tuple(dev) != tuple(weights):
            out.append((0, dev))
    return out


def _payoff(game: StochasticGame, s: int, weights, dim: int) -> tuple:
    vals = [sum((w * game.payoff[s][a][i] for a, w in enumerate(weights) if w), ZERO)
            for i in range(game.n_players)]
    return tuple(vals[:dim])


@dataclass
class _StateData:
    u0: tuple
    p0: list
    devs: list  # (component, u_dev, p_dev)
    q0: list


def _state_data(game, kernel, spec, s, choice, weights, dim) -> _StateData:
    p0 = kernel.mix(s, weights)
    nY = len(kernel.signals)
    q0 = [sum(p0[t * nY:(t + 1) * nY], ZERO) for t in range(game.n_states)]
    devs = []
    for i, w in _deviations(game, spec, choice, weights):
        devs.append((i, _payoff(game, s, w, game.n_players)[i], kernel.mix(s, w)))
    return _StateData(_payoff(game, s, weights, dim), p0, devs, q0)


def profile_bound(lam, data: Sequence[_StateData]) -> Fraction:
    """Exact upper bound on lam . v for a fixed profile.

    Averaging promise keeping under a stationary distribution pi of the
    profile's chain, the increment term has expectation
    ``sum_{s,t} pi_s Q(s,t) l_s(t)``, a circulation whose cycle sums are
    nonpositive.  Hence ``lam . v <= sum_s pi_s lam . u(alpha_s, s)``.
    """
    Q = [list(d.q0) for d in data]
    pi = stationary(Q)
    if pi is None:
        pi = _some_stationary(Q)
    return sum((pi[s] * _dot(lam, d.u0) for s, d in enumerate(data)), ZERO)


def _some_stationary(Q) -> tuple:
    n = len(Q)
    b = LPBuilder("feasibility")
    x = [b.var(f"pi{s}") for s in range(n)]
    for t in range(n):
        coeffs = {x[s]: Q[s][t] for s in range(n)}
        coeffs[x[t]] = coeffs.get(x[t], ZERO) - 1
        b.add(coeffs, "==", 0)
    b.add({j: 1 for j in x}, "==", 1)
    return solve(b.build()).primal


# ---------------------------------------------------------------------------
# the per-profile LP


@dataclass
class _ProfileLP:
    builder: LPBuilder
    v: list
    x: dict  # (s, c, i) -> var
    m: dict  # (s, t) -> var
    dropped: set  # (s, c) cells with no cycle row
    cells: list  # (s, c) pairs that carry a cycle row


def _build_profile_lp(game, kernel, lam, data: Sequence[_StateData], dim: int,
                      cycles) -> _ProfileLP:
    nS, nY = game.n_states, len(kernel.signals)
    ncol = nS * nY
    b = LPBuilder("max")
    v = [b.free(f"v[{i}]") for i in range(dim)]
    relevant = {}
    for s, d in enumerate(data):
        for c in range(ncol):
            comps = set()
            if d.p0[c]:
                comps.update(range(dim))
            for i, _, pdev in d.devs:
                if pdev[c] != d.p0[c]:
                    comps.add(i)
            relevant[s, c] = comps
    x = {}
    for s in range(nS):
        for c in range(ncol):
            for i in sorted(relevant[s, c]):
                x[s, c, i] = b.free(f"x[{s},{c},{i}]")
    m = {(s, t): b.free(f"m[{s},{t}]") for s in range(nS) for t in range(nS)}
    b.objective({v[i]: lam[i] for i in range(dim) if lam[i]})
    for s, d in enumerate(data):
        for i in range(dim):
            coeffs = {v[i]: Fraction(1)}
            for c in range(ncol):
                if d.p0[c] and (s, c, i) in x:
                    coeffs[x[s, c, i]] = -d.p0[c]
            b.add(coeffs, "==", d.u0[i], name=f"promise[{s},{i}]")
        for k, (i, udev, pdev) in enumerate(d.devs):
            coeffs = {}
            for c in range(ncol):
                diff = d.p0[c] - pdev[c]
                if diff:
                    coeffs[x[s, c, i]] = diff
            b.add(coeffs, ">=", udev - d.u0[i], name=f"ic[{s},{k}]")
    dropped, cells = set(), []
    for s in range(nS):
        for c in range(ncol):
            if any(lam[i] and i not in relevant[s, c] for i in range(dim)):
                dropped.add((s, c))
                continue
            coeffs = {x[s, c, i]: lam[i] for i in range(dim) if lam[i]}
            coeffs[m[s, c // nY]] = Fraction(-1)
            b.add(coeffs, "<=", 0, name=f"cell[{s},{c}]")
            cells.append((s, c))
    for cyc in cycles:
        b.add({m[e]: 1 for e in cycle_edges(cyc)}, "<=", 0, name=f"cycle{cyc}")
    return _ProfileLP(b, v, x, m, dropped, cells)


def _extract(plp: _ProfileLP, primal, lam, dim: int, nS: int, nY: int):
    v = tuple(primal[j] for j in plp.v)
    m = {key: primal[j] for key, j in plp.m.items()}
    x = {}
    for s in range(nS):
        for c in range(nS * nY):
            t, y = divmod(c, nY)
            vec = [primal[plp.x[s, c, i]] if (s, c, i) in plp.x else ZERO for i in range(dim)]
            if (s, c) in plp.dropped:
                # a free component can push lam . x strictly below m_s(t)
                target = min(m[s, t], ZERO) - 1
                j = next(i for i in range(dim) if lam[i] and (s, c, i) not in plp.x)
                rest = sum((lam[i] * vec[i] for i in range(dim) if i != j), ZERO)
                vec[j] = (target - rest) / lam[j]
            x[s, t, y] = tuple(vec)
    return v, x, m


def _binding(lam, x: dict, nS: int, cycles) -> tuple:
    ell = {}
    for (s, t, y), vec in x.items():
        val = _dot(lam, vec)
        if (s, t) not in ell or val > ell[s, t]:
            ell[s, t] = val
    return tuple(cyc for cyc in cycles
                 if sum((ell[e] for e in cycle_edges(cyc)), ZERO) == 0)


def _prepare(game, mon_or_kernel, spec):
    kernel = (mon_or_kernel if isinstance(mon_or_kernel, JointKernel)
              else joint_kernel(game, mon_or_kernel))
    if spec.mode == "general":
        if len(spec.direction) != game.n_players:
            raise ScoreError("direction length differs from the number of players")
        dim = game.n_players
    else:
        if symmetrize_check(game) is not None:
            raise ScoreError("symmetric programs need a symmetric game")
        dim = 1
    return kernel, dim


def solve_score(game: StochasticGame, mon, spec: ScoreProgramSpec,
                prune: bool = True) -> ScoreSolution:
    """Best profile in the action domain and its certifying LP solution.

    Ties between profiles are broken toward the earliest profile in
    enumeration order.  ``prune=False`` solves every profile.
    """
    kernel, dim = _prepare(game, mon, spec)
    lam = spec.direction
    nS, nY = game.n_states, len(kernel.signals)
    cycles = simple_cycles(nS)
    domain = _domain(game, spec)
    if not domain or any(not d for d in domain):
        raise ScoreError("empty action domain")
    cache = {}

    def data_for(s, idx):
        if (s, idx) not in cache:
            choice, w = domain[s][idx]
            cache[s, idx] = _state_data(game, kernel, spec, s, choice, w, dim)
        return cache[s, idx]

    combos = list(itertools.product(*(range(len(d)) for d in domain)))
    bounds = [profile_bound(lam, [data_for(s, idx[s]) for s in range(nS)]) for idx in combos]
    order = sorted(range(len(combos)), key=lambda k: (-bounds[k], k))
    best = None  # (value, combo position, primal, plp)
    values = {}
    solved = 0
    for pos in order:
        if prune and best is not None and bounds[pos] < best[0]:
            break
        idx = combos[pos]
        data = [data_for(s, idx[s]) for s in range(nS)]
        plp = _build_profile_lp(game, kernel, lam, data, dim, cycles)
        out = solve(plp.builder.build())
        solved += 1
        if out.verdict == "unbounded":
            raise ScoreError(f"score LP unbounded at profile {idx}; this should not happen")
        if not out.optimal:
            continue
        values[pos] = out.value
        if best is None or out.value > best[0] or (out.value == best[0] and pos < best[1]):
            best = (out.value, pos, out.primal, plp)
    if best is None:
        return ScoreSolution(spec, None, lp_solved=solved)
    value, pos, primal, plp = best
    v, x, m = _extract(plp, primal, lam, dim, nS, nY)
    idx = combos[pos]
    optimal = tuple(combos[p] for p in sorted(values) if values[p] == value)
    return ScoreSolution(
        spec, value,
        profile=tuple(domain[s][idx[s]][0] for s in range(nS)),
        weights=tuple(domain[s][idx[s]][1] for s in range(nS)),
        v=v, x=x, m=m,
        binding_cycles=_binding(lam, x, nS, cycles),
        optimal_profiles=tuple(tuple(domain[s][c[s]][0] for s in range(nS)) for c in optimal),
        lp_solved=solved)


def profile_lp(game: StochasticGame, mon, spec: ScoreProgramSpec, choice: Sequence
               ) -> RationalLPProblem:
    """The score LP for one fixed profile (for audit dumps)."""
    kernel, dim = _prepare(game, mon, spec)
    domain = _domain(game, spec)
    data = []
    for s in range(game.n_states):
        w = dict(domain[s])[choice[s]]
        data.append(_state_data(game, kernel, spec, s, choice[s], w, dim))
    return _build_profile_lp(game, kernel, spec.direction, data, dim,
                             simple_cycles(game.n_states)).builder.build()


# ---------------------------------------------------------------------------
# feasibility of explicit points


def check_feasible_point(game: StochasticGame, kernel: JointKernel, spec: ScoreProgramSpec,
                         choice: Sequence, v: Sequence[Fraction], x: dict) -> list:
    """Violated constraints of the score program at an explicit point.

    ``choice[s]`` is the per-state label used by the spec's mode (profile
    index, symmetric action, or mixture).  The cycle condition is checked
    in its reduced form, which is equivalent to the full family.
    """
    dim = len(spec.direction)
    lam = spec.direction
    nS = game.n_states
    domain = _domain(game, spec)
    out = []
    for s in range(nS):
        weights = dict(domain[s]).get(choice[s])
        if weights is None:
            if spec.mode == "ss":
                weights = tuple(symmetric_weights(game, choice[s]))
            else:
                raise ScoreError(f"unknown choice {choice[s]!r}")
        d = _state_data(game, kernel, spec, s, choice[s], weights, dim)
        cols = kernel.columns()

        def expect(p, i):
            return sum((p[c] * x[(s,) + cols[c]][i] for c in range(len(cols)) if p[c]), ZERO)

        for i in range(dim):
            rhs = d.u0[i] + expect(d.p0, i)
            if v[i] != rhs:
                out.append(f"promise keeping fails at state {s}, component {i}: {v[i]} != {rhs}")
        for i, udev, pdev in d.devs:
            rhs = udev + expect(pdev, i)
            if v[i] < rhs:
                out.append(f"incentive constraint fails at state {s}, component {i}: "
                           f"{v[i]} < {rhs}")
    ell = {}
    for (s, t, y), vec in x.items():
        val = _dot(lam, vec)
        if (s, t) not in ell or val > ell[s, t]:
            ell[s, t] = val
    for cyc in simple_cycles(nS):
        total = sum((ell[e] for e in cycle_edges(cyc)), ZERO)
        if total > 0:
            out.append(f"cycle {cyc} has score {total} > 0")
    return out


def transport_point(solution: ScoreSolution, witness_blocks: dict, kernel: JointKernel,
                    kernel_p: JointKernel) -> dict:
    """Carry a feasible point for p to one for p' through a weighted garbling.

    With ``l_s(t) = x_s(t, y*)`` for a maximiser ``y*`` of ``lam . x_s(t, .)``
    and ``z = x - l``, the new increments are
    ``l_s(t') + sum_{t,y} gamma phi z_s(t, y)`` (zero garbled part where
    ``gamma = 0``).
    """
    lam = solution.spec.direction
    nS, nY, nYp = len(kernel.states), len(kernel.signals), len(kernel_p.signals)
    dim = len(lam)
    out = {}
    for s in range(nS):
        blk = witness_blocks[s]
        ell = {}
        for t in range(nS):
            vals = [solution.x[s, t, y] for y in range(nY)]
            ell[t] = max(vals, key=lambda vec: _dot(lam, vec))
        z = {}
        for t in range(nS):
            for y in range(nY):
                z[t * nY + y] = tuple(a - b for a, b in zip(solution.x[s, t, y], ell[t]))
        for tp in range(nS):
            for yp in range(nYp):
                cp = tp * nYp + yp
                g = blk.weights[cp]
                zt = [ZERO] * dim
                if g:
                    for c, phi in enumerate(blk.channel[cp]):
                        if phi:
                            for i in range(dim):
                                zt[i] += g * phi * z[c][i]
                out[s, tp, yp] = tuple(e + w for e, w in zip(ell[tp], zt))
    return out


# ---------------------------------------------------------------------------
# payoff polygon


class PolygonError(ValueError):
    pass


COMPASS_8 = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
COMPASS_16 = ((1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 2), (-1, 1), (-2, 1),
              (-1, 0), (-2, -1), (-1, -1), (-1, -2), (0, -1), (1, -2), (1, -1), (2, -1))


def directions_preset(name: str) -> tuple:
    presets = {"compass-8": COMPASS_8, "compass-16": COMPASS_16}
    if name not in presets:
        raise ValueError(f"unknown direction preset {name!r}")
    return tuple(tuple(Fraction(v) for v in d) for d in presets[name])


@dataclass(frozen=True)
class LimitPayoffPolytope:
    directions: tuple
    scores: tuple  # k per direction (None = minus infinity)
    solutions: tuple
    vertices: Optional[tuple] = None  # counter-clockwise, N = 2 only

    def halfspaces(self) -> list:
        return [(d, k) for d, k in zip(self.directions, self.scores)]


def _half(d) -> int:
    return 0 if (d[1] > 0 or (d[1] == 0 and d[0] > 0)) else 1


def _cross(a, b) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


def _angle_key(d):
    """Sort key realising exact polar-angle order via a comparator."""
    import functools

    def cmp(a, b):
        ha, hb = _half(a), _half(b)
        if ha != hb:
            return ha - hb
        c = _cross(a, b)
        return -1 if c > 0 else (1 if c < 0 else 0)

    return functools.cmp_to_key(cmp)(d)


def polygon(halfspaces: Sequence) -> tuple:
    """Vertices (counter-clockwise) of ``{v : d . v <= k}`` in the plane."""
    if any(k is None for _, k in halfspaces):
        raise PolygonError("a direction has score minus infinity; the set is empty")
    best = {}
    for d, k in halfspaces:
        d = tuple(Fraction(v) for v in d)
        if not any(d):
            raise PolygonError("zero direction")
        # scale to a canonical representative of the ray
        scale = max(abs(d[0]), abs(d[1]))
        key = (d[0] / scale, d[1] / scale)
        kk = Fraction(k) / scale
        if key not in best or kk < best[key]:
            best[key] = kk
    normals = sorted(best, key=_angle_key)
    if len(normals) < 3:
        raise PolygonError("fewer than 3 distinct directions; the set is unbounded")
    for a, b in zip(normals, normals[1:] + normals[:1]):
        if _cross(a, b) <= 0:
            raise PolygonError("directions leave a gap of at least pi; the set is unbounded")
    pts = set()
    for a, b in itertools.combinations(normals, 2):
        det = _cross(a, b)
        if det == 0:
            continue
        ka, kb = best[a], best[b]
        pt = ((ka * b[1] - kb * a[1]) / det, (a[0] * kb - b[0] * ka) / det)
        if all(n[0] * pt[0] + n[1] * pt[1] <= best[n] for n in normals):
            pts.add(pt)
    if not pts:
        raise PolygonError("the halfspaces have empty intersection")
    pts = sorted(pts)
    if len(pts) <= 2:
        return tuple(pts)
    cx = sum((p[0] for p in pts), ZERO) / len(pts)
    cy = sum((p[1] for p in pts), ZERO) / len(pts)
    return tuple(sorted(pts, key=lambda p: _angle_key((p[0] - cx, p[1] - cy))))


def limit_polytope(game: StochasticGame, mon, directions: Sequence, polygon_mode=None
                   ) -> LimitPayoffPolytope:
    dirs = tuple(tuple(Fraction(v) for v in d) for d in directions)
    sols = tuple(solve_score(game, mon, ScoreProgramSpec(d)) for d in dirs)
    scores = tuple(s.k for s in sols)
    verts = None
    if polygon_mode is None:
        polygon_mode = game.n_players == 2
    if polygon_mode:
        if game.n_players != 2:
            raise PolygonError("polygon output needs exactly two players")
        verts = polygon(list(zip(dirs, scores)))
    return LimitPayoffPolytope(dirs, scores, sols, verts)


# ---------------------------------------------------------------------------
# strongly symmetric interval


@dataclass(frozen=True)
class SSEInterval:
    lower: Optional[Fraction]  # -k(-1)
    upper: Optional[Fraction]  # k(+1)
    plus: ScoreSolution
    minus: ScoreSolution

    @property
    def empty(self) -> bool:
        return self.lower is None or self.upper is None or self.lower > self.upper


def sse_interval(game: StochasticGame, mon, pure: bool = True, grid=None) -> SSEInterval:
    mode = "pss" if pure else "ss"
    plus = solve_score(game, mon, ScoreProgramSpec((1,), mode, grid))
    minus = solve_score(game, mon, ScoreProgramSpec((-1,), mode, grid))
    lower = None if minus.k is None else -minus.k
    return SSEInterval(lower, plus.k, plus, minus)


# ---------------------------------------------------------------------------
# essentiality


@dataclass(frozen=True)
class EssentialityReport:
    essential: bool
    witnesses: dict  # binding cycle -> (s, t, y) or None
    solution: ScoreSolution
    second_stage: bool = False
    note: str = ("the definition quantifies over all optimal solutions; a second-stage "
                 "re-solve maximising burning slack is used before declaring not essential")


def _burn_witnesses(solution: ScoreSolution, kernel: JointKernel) -> dict:
    lam = solution.spec.direction
    ell = solution.ell()
    nY = len(kernel.signals)
    out = {}
    for cyc in solution.binding_cycles:
        found = None
        for s in cyc:
            p0 = kernel.mix(s, solution.weights[s])
            for c, pr in enumerate(p0):
                t, y = divmod(c, nY)
                if pr > 0 and _dot(lam, solution.x[s, t, y]) < ell[s, t]:
                    found = (s, t, y)
                    break
            if found:
                break
        out[cyc] = found
    return out


def check_essentiality(solution: ScoreSolution, kernel: JointKernel, lam=None,
                       game: Optional[StochasticGame] = None) -> EssentialityReport:
    """Score burning on every binding cycle of ``solution``.

    When ``game`` is given and the returned solution is not essential, each
    optimal profile is re-solved with the score fixed at ``k`` while
    maximising the total slack of the burning inequalities.
    """
    if lam is not None and tuple(Fraction(v) for v in lam) != solution.spec.direction:
        raise ScoreError("direction differs from the solution's direction")
    if not solution.feasible:
        raise ScoreError("no feasible solution to test")
    if solution.weights is None or len(solution.weights[0]) != kernel.n_profiles:
        raise ScoreError("solution does not match the kernel")
    wit = _burn_witnesses(solution, kernel)
    if all(w is not None for w in wit.values()) or game is None:
        return EssentialityReport(all(w is not None for w in wit.values()), wit, solution)
    for choice in solution.optimal_profiles:
        alt = _second_stage(game, kernel, solution, choice)
        if alt is None:
            continue
        wit2 = _burn_witnesses(alt, kernel)
        if all(w is not None for w in wit2.values()):
            return EssentialityReport(True, wit2, alt, True)
    return EssentialityReport(False, wit, solution, True)


def _second_stage(game, kernel, solution, choice) -> Optional[ScoreSolution]:
    spec = solution.spec
    lam = spec.direction
    dim = len(lam)
    nS, nY = game.n_states, len(kernel.signals)
    domain = _domain(game, spec)
    data, weights = [], []
    for s in range(nS):
        w = dict(domain[s])[choice[s]]
        weights.append(w)
        data.append(_state_data(game, kernel, spec, s, choice[s], w, dim))
    cycles = simple_cycles(nS)
    plp = _build_profile_lp(game, kernel, lam, data, dim, cycles)
    b = plp.builder
    b.add({plp.v[i]: lam[i] for i in range(dim) if lam[i]}, ">=", solution.k, name="score")
    slack = {}
    for (s, c) in plp.cells:
        if data[s].p0[c]:
            sig = b.var(f"sigma[{s},{c}]", 0, 1)
            slack[sig] = Fraction(1)
            coeffs = {plp.x[s, c, i]: lam[i] for i in range(dim) if lam[i]}
            coeffs[plp.m[s, c // nY]] = Fraction(-1)
            coeffs[sig] = Fraction(1)
            b.add(coeffs, "<=", 0)
    b.objective(slack)
    out = solve(b.build())
    if not out.optimal:
        return None
    v, x, m = _extract(plp, out.primal, lam, dim, nS, nY)
    return ScoreSolution(spec, solution.k, tuple(choice), tuple(weights), v, x, m,
                         _binding(lam, x, nS, cycles), solution.optimal_profiles)


# ---------------------------------------------------------------------------
# strict improvement


@dataclass(frozen=True)
class StrictImprovementReport:
    preconditions_met: bool
    unmet: tuple
    k: Optional[Fraction]
    k_prime: Optional[Fraction]
    gap: Optional[Fraction]
    improved: Optional[bool]


def verify_strict_improvement(game: StochasticGame, mon: MonitoringStructure,
                              mon_p: MonitoringStructure, lam) -> StrictImprovementReport:
    from .garbling import check_strict_weighted_garbling

    p, pp = joint_kernel(game, mon), joint_kernel(game, mon_p)
    unmet = []
    if not check_strict_weighted_garbling(p, pp).holds:
        unmet.append("Pi is not a strict weighted garbling of Pi'")
    spec = ScoreProgramSpec(lam)
    sol = solve_score(game, p, spec)
    sol_p = solve_score(game, pp, spec)
    if sol.feasible:
        if not check_essentiality(sol, p, game=game).essential:
            unmet.append("the public signal is not essential in this direction")
    else:
        unmet.append("the score program for Pi is infeasible")
    gap = None if not (sol.feasible and sol_p.feasible) else sol_p.k - sol.k
    improved = None if gap is None else gap > 0
    return StrictImprovementReport(not unmet, tuple(unmet), sol.k, sol_p.k, gap, improved)


# ---------------------------------------------------------------------------
# block construction


class BoundViolation(ValueError):
    pass


@dataclass(frozen=True)
class BlockConstructionReport:
    lam: int
    z: Fraction
    n: int
    delta: Fraction
    bounds: tuple  # (name, holds, detail)
    histories: int
    continuation: dict  # history -> w
    values: dict  # initial state -> value of the block game
    item1: bool
    item1_failures: tuple
    item2: bool
    item2_failures: tuple
    in_range: bool
    range_failures: tuple

    @property
    def passed(self) -> bool:
        return self.item1 and self.item2 and self.in_range


def choose_direction(z: Fraction, Z) -> int:
    """+1 (push down) in the upper half of Z, -1 in the lower half."""
    lo, hi = Z
    return 1 if 2 * z >= lo + hi else -1


def block_bounds(lam_points: dict, z, Z, n: int, delta, n_states: int) -> list:
    """The parameter inequalities, as (name, holds, detail) triples."""
    zlo, zhi = Z
    v_minus, v_plus = lam_points[-1].v[0], lam_points[1].v[0]
    eps0 = min(zlo - v_minus, v_plus - zhi)
    kappa = max([abs(vec[0]) for sol in lam_points.values() for vec in sol.x.values()]
                + [abs(zz - sol.v[0]) for sol in lam_points.values() for zz in (zlo, zhi)])
    d1 = delta ** (n - 1)
    out = [
        ("z in Z", zlo <= z <= zhi, f"{zlo} <= {z} <= {zhi}"),
        ("eps0 > 0", eps0 > 0, f"eps0 = {eps0}"),
        ("(n/2)^2 (1-delta) <= |S|", Fraction(n * n, 4) * (1 - delta) <= n_states,
         f"{Fraction(n * n, 4) * (1 - delta)} <= {n_states}"),
        ("1-delta^(n-1) >= (n-1)(1-delta)/2", 1 - d1 >= (n - 1) * (1 - delta) / 2,
         f"{1 - d1} >= {(n - 1) * (1 - delta) / 2}"),
        ("eps0 (n-1)/2 - 2 kappa0 |S| > 0", eps0 * (n - 1) / 2 - 2 * kappa * n_states > 0,
         f"{eps0 * (n - 1) / 2 - 2 * kappa * n_states} > 0 (kappa0 = {kappa})"),
        ("(1-delta^(n-1))/delta^(n-1) 2 kappa0 < (zhi-zlo)/2",
         (1 - d1) / d1 * 2 * kappa < (zhi - zlo) / 2,
         f"{(1 - d1) / d1 * 2 * kappa} < {(zhi - zlo) / 2}"),
    ]
    return out


def verify_block_construction(game: StochasticGame, mon, lam: int, z, Z, n: int, delta,
                              points: dict, enforce_bounds: bool = True
                              ) -> BlockConstructionReport:
    """Check one block of the strongly symmetric construction exactly.

    ``points`` maps -1 and +1 to feasible :class:`ScoreSolution` objects of
    the symmetric program.  Histories are ``(s1, y1, s2, ..., y_{n-1}, s_n)``
    and the block game lasts ``n - 1`` stages.
    """
    z, delta = Fraction(z), Fraction(delta)
    Z = (Fraction(Z[0]), Fraction(Z[1]))
    if lam not in (-1, 1):
        raise ValueError("lam must be +1 or -1")
    kernel = mon if isinstance(mon, JointKernel) else joint_kernel(game, mon)
    nS, nY = game.n_states, len(kernel.signals)
    bounds = block_bounds(points, z, Z, n, delta, nS)
    if enforce_bounds:
        for name, ok, detail in bounds:
            if not ok:
                raise BoundViolation(f"{name} fails: {detail}")
    sol = points[lam]
    if sol.spec.mode == "general":
        raise ValueError("block construction needs a symmetric solution")
    v = sol.v[0]
    B = len(game.actions[0])
    dn = delta ** (n - 1)
    mixes = [sol.profile[s] if sol.spec.mode == "ss"
             else tuple(Fraction(int(j == sol.profile[s])) for j in range(B)) for s in range(nS)]

    def w_of(h) -> Fraction:
        total = ZERO
        for k in range(n - 1):
            s, y, t = h[2 * k], h[2 * k + 1], h[2 * k + 2]
            total += delta ** k * sol.x[s, t, y][0]
        return z + (1 - dn) / dn * (z - v) + (1 - delta) / dn * total

    # stage data: own payoff and flattened kernel under alpha and deviations
    stage = []
    for s in range(nS):
        base = symmetric_weights(game, mixes[s])
        devs = [symmetric_weights(game, mixes[s], deviator_action=b) for b in range(B)]
        stage.append(((_payoff(game, s, base, 1)[0], kernel.mix(s, base)),
                      [(_payoff(game, s, w, 1)[0], kernel.mix(s, w)) for w in devs]))

    cont = {}
    item1_fail, item2_fail, range_fail = [], [], []

    def value(h) -> Fraction:
        if len(h) == 2 * n - 1:
            w = w_of(h)
            cont[h] = w
            if not lam * w < lam * z:
                item2_fail.append(h)
            if not Z[0] <= w <= Z[1]:
                range_fail.append(h)
            return w
        s = h[-1]
        nxt = {}
        for c in range(nS * nY):
            t, y = divmod(c, nY)
            nxt[c] = value(h + (y, t))
        (u0, p0), devs = stage[s]
        V = (1 - delta) * u0 + delta * sum((p0[c] * nxt[c] for c in nxt if p0[c]), ZERO)
        for b, (ud, pd) in enumerate(devs):
            Vd = (1 - delta) * ud + delta * sum((pd[c] * nxt[c] for c in nxt if pd[c]), ZERO)
            if Vd > V:
                item1_fail.append((h, b))
        return V

    values = {}
    for s in range(nS):
        values[s] = value((s,))
        if values[s] != z:
            item1_fail.append(((s,), "value differs from z"))
    return BlockConstructionReport(
        lam, z, n, delta, tuple(bounds), len(cont), cont, values,
        not item1_fail, tuple(item1_fail), not item2_fail, tuple(item2_fail),
        not range_fail, tuple(range_fail))


@dataclass(frozen=True)
class BlockChainReport:
    first: BlockConstructionReport
    second: dict  # continuation value w -> report of the block started at w

    @property
    def passed(self) -> bool:
        return self.first.passed and all(r.passed for r in self.second.values())


def verify_block_chain(game: StochasticGame, mon, z, Z, n: int, delta, points: dict,
                       enforce_bounds: bool = True) -> BlockChainReport:
    """Two consecutive blocks: one at ``z``, then one from every distinct
    continuation value it produces, each with its own direction."""
    first = verify_block_construction(game, mon, choose_direction(Fraction(z), Z), z, Z, n,
                                      delta, points, enforce_bounds)
    second = {}
    if first.in_range:
        for w in sorted(set(first.continuation.values())):
            second[w] = verify_block_construction(game, mon, choose_direction(w, Z), w, Z, n,
                                                  delta, points, enforce_bounds)
    return BlockChainReport(first, second)
