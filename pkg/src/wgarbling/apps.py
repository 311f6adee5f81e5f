"""Instance generators: the worked examples, the PD and the partnership game."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import (MonitoringStructure, StochasticGame, is_stage_nash, to_rational)

F = Fraction


class ParameterError(ValueError):
    pass


def pd_payoffs(g, l) -> list:
    """Stage payoffs over profiles CC, CD, DC, DD."""
    g, l = to_rational(g), to_rational(l)
    return [[F(1), F(1)], [-l, 1 + g], [1 + g, -l], [F(0), F(0)]]


def make_pd(g=F(1, 2), l=F(1, 4), n_states: int = 1, states: Optional[Sequence[str]] = None
            ) -> StochasticGame:
    """Prisoners' Dilemma with actions C, D; several states share the payoffs
    and move uniformly when ``n_states > 1``."""
    g, l = to_rational(g), to_rational(l)
    if not (g > 0 and l > 0):
        raise ParameterError("g and l must be positive")
    if not 1 > g - l:
        raise ParameterError("need 1 > g - l so that CC maximises the joint payoff")
    states = tuple(states or (["s"] if n_states == 1 else [f"s{k + 1}" for k in range(n_states)]))
    n = len(states)
    payoff = [pd_payoffs(g, l) for _ in states]
    transition = [[[F(1, n)] * n for _ in range(4)] for _ in states]
    return StochasticGame(states, ("1", "2"), (("C", "D"), ("C", "D")), payoff, transition)


def perfect_monitoring(game: StochasticGame) -> MonitoringStructure:
    """One signal per action profile, revealed exactly."""
    nA = len(game.profiles)
    labels = tuple(game.profile_label(a).replace(",", "") for a in range(nA))
    law = [[[[F(int(y == a)) for y in range(nA)] for _ in game.states] for a in range(nA)]
           for _ in game.states]
    return MonitoringStructure(labels, law)


def pd_noisy_monitor(game: StochasticGame, eta) -> MonitoringStructure:
    """Binary signal c/d, correct with probability 1 - eta (c after CC)."""
    eta = to_rational(eta)
    law = []
    for _ in game.states:
        per_a = []
        for a in range(len(game.profiles)):
            pc = 1 - eta if a == 0 else eta
            per_a.append([[pc, 1 - pc] for _ in game.states])
        law.append(per_a)
    return MonitoringStructure(("c", "d"), law)


def make_example1(eta, eta_p, eps, g=F(1, 2), l=F(1, 4)):
    """Repeated PD with a noisy binary signal and a sometimes-silent sharper one.

    Returns ``(game, Pi, PiPrime)``; PiPrime has signals c, d, n.
    """
    eta, eta_p, eps = to_rational(eta), to_rational(eta_p), to_rational(eps)
    if not (0 < eta_p < eta < F(1, 2)):
        raise ParameterError("need 0 < eta' < eta < 1/2")
    if not (0 < eps <= 1):
        raise ParameterError("need eps in (0, 1]")
    game = make_pd(g, l)
    mon = pd_noisy_monitor(game, eta)
    law = []
    for a in range(4):
        pc = eps * (1 - eta_p) if a == 0 else eps * eta_p
        pd = eps - pc
        law.append([[pc, pd, 1 - eps]])
    mon_p = MonitoringStructure(("c", "d", "n"), [law])
    return game, mon, mon_p


def make_example2(eps, g=F(1, 2), l=F(1, 4)):
    """Two states with uniform action-independent transitions.

    Pi's signal is equally informative after both next states; PiPrime's is
    sharper after s1 and weaker after s2, by ``eps``.  Stage payoffs are a
    PD at both states (the comparison itself uses only the kernels).
    """
    eps = to_rational(eps)
    if not (0 <= eps <= F(1, 6)):
        raise ParameterError("need eps in [0, 1/6]")
    game = make_pd(g, l, states=("s1", "s2"))
    law, law_p = [], []
    for _ in range(2):
        row, row_p = [], []
        for a in range(4):
            cc = a == 0
            pc = F(2, 3) if cc else F(1, 3)
            row.append([[pc, 1 - pc], [pc, 1 - pc]])
            p1 = F(3, 4) if cc else F(1, 4)
            p2 = F(2, 3) - eps if cc else F(1, 3) + eps
            row_p.append([[p1, 1 - p1], [p2, 1 - p2]])
        law.append(row)
        law_p.append(row_p)
    return game, MonitoringStructure(("c", "d"), law), MonitoringStructure(("c", "d"), law_p)


# ---------------------------------------------------------------------------
# partnership


@dataclass(frozen=True)
class PartnershipSpec:
    """Effort game: ``revenue[s][k]`` for k efforts, ``transition[s][t]``,
    ``signal_law[s][k][t][y]``."""

    n_players: int
    cost: Fraction
    revenue: tuple
    transition: tuple
    signals: tuple
    signal_law: tuple
    states: Optional[tuple] = None

    def state_names(self) -> tuple:
        return tuple(self.states or [f"s{k + 1}" for k in range(len(self.transition))])


def partnership_payoff(spec: PartnershipSpec, s: int, k: int, works: bool) -> Fraction:
    share = F(spec.revenue[s][k]) / spec.n_players
    return share - spec.cost if works else share


def make_partnership(spec: PartnershipSpec):
    """Returns ``(game, monitor)``; action 0 is effort ``e``, action 1 is ``ne``."""
    N = spec.n_players
    if N < 2:
        raise ParameterError("need at least two players")
    if not spec.cost > 0:
        raise ParameterError("effort cost must be positive")
    states = spec.state_names()
    nS = len(states)
    if len(spec.revenue) != nS or any(len(r) != N + 1 for r in spec.revenue):
        raise ParameterError("revenue must list N + 1 values per state")
    actions = tuple(("e", "ne") for _ in range(N))
    players = tuple(str(i + 1) for i in range(N))
    skeleton = StochasticGame(states, players, actions, [[[0] * N] * 2 ** N] * nS,
                              [[[1] + [0] * (nS - 1)] * 2 ** N] * nS)
    payoff, transition, law = [], [], []
    for s in range(nS):
        ps, qs, fs = [], [], []
        for prof in skeleton.profiles:
            k = sum(1 for b in prof if b == 0)
            ps.append([partnership_payoff(spec, s, k, b == 0) for b in prof])
            qs.append(list(spec.transition[s]))
            fs.append([list(spec.signal_law[s][k][t]) for t in range(nS)])
        payoff.append(ps)
        transition.append(qs)
        law.append(fs)
    game = StochasticGame(states, players, actions, payoff, transition)
    return game, MonitoringStructure(tuple(spec.signals), law)


def partnership_flags(spec: PartnershipSpec) -> dict:
    """Per state: is full effort / no effort a stage Nash equilibrium?"""
    game, _ = make_partnership(spec)
    N = spec.n_players
    out = {}
    for s, name in enumerate(game.states):
        full = game.profile_index([0] * N)
        none = game.profile_index([1] * N)
        out[name] = {"full_effort_nash": is_stage_nash(game, s, full),
                     "no_effort_nash": is_stage_nash(game, s, none)}
    return out


# ---------------------------------------------------------------------------
# random instances


def random_distribution(rng: random.Random, n: int, denom: int = 12,
                        full_support: bool = False) -> list:
    """Uniformly drawn integer composition of ``denom`` into ``n`` parts."""
    lo = 1 if full_support else 0
    if full_support and denom < n:
        denom = n
    cuts = sorted(rng.randint(0, denom - lo * n) for _ in range(n - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [denom - lo * n])]
    return [F(v + lo, denom) for v in parts]


def random_game(rng: random.Random, n_states: int, n_actions: Sequence[int],
                payoff_range: int = 3, full_support_q: bool = True) -> StochasticGame:
    states = tuple(f"s{k + 1}" for k in range(n_states))
    players = tuple(str(i + 1) for i in range(len(n_actions)))
    actions = tuple(tuple(f"a{b}" for b in range(m)) for m in n_actions)
    nA = 1
    for m in n_actions:
        nA *= m
    payoff = [[[F(rng.randint(-payoff_range, payoff_range)) for _ in players]
               for _ in range(nA)] for _ in states]
    transition = [[random_distribution(rng, n_states, 6, full_support_q) for _ in range(nA)]
                  for _ in states]
    return StochasticGame(states, players, actions, payoff, transition)


def random_monitor(rng: random.Random, game: StochasticGame, n_signals: int,
                   denom: int = 12, full_support: bool = False) -> MonitoringStructure:
    law = [[[random_distribution(rng, n_signals, denom, full_support) for _ in game.states]
            for _ in game.profiles] for _ in game.states]
    return MonitoringStructure(tuple(f"y{k}" for k in range(n_signals)), law)


def random_channel(rng: random.Random, n_from: int, n_to: int, denom: int = 6) -> list:
    """Row-stochastic matrix ``channel[from][to]``."""
    return [random_distribution(rng, n_to, denom) for _ in range(n_from)]


def garble_monitor(game: StochasticGame, mon_p: MonitoringStructure, channels,
                   signals: Optional[Sequence[str]] = None) -> MonitoringStructure:
    """Monitor whose joint kernel is ``sum_{t',y'} psi_s(t,y|t',y') p'(t',y'|s,a)``.

    ``channels[s][c'][c]`` is column-stochastic over (t, y) per source
    (t', y'), so the result is a joint garbling of ``mon_p``.  Rows with
    q(t|s,a) = 0 get a uniform signal law.
    """
    nS = game.n_states
    nYp = len(mon_p.signals)
    nY = len(channels[0][0]) // nS
    law = []
    for s in range(nS):
        per_a = []
        for a in range(len(game.profiles)):
            joint = [F(0)] * (nS * nY)
            for tp in range(nS):
                for yp in range(nYp):
                    w = game.transition[s][a][tp] * mon_p.law[s][a][tp][yp]
                    if w:
                        for c, v in enumerate(channels[s][tp * nYp + yp]):
                            joint[c] += w * v
            rows = []
            for t in range(nS):
                mass = sum(joint[t * nY:(t + 1) * nY], F(0))
                q = game.transition[s][a][t]
                if q == 0:
                    rows.append([F(1, nY)] * nY)
                    continue
                if mass != q:
                    raise ParameterError("channel changes the state marginal; "
                                         "use a state-preserving channel")
                rows.append([joint[t * nY + y] / q for y in range(nY)])
            per_a.append(rows)
        law.append(per_a)
    return MonitoringStructure(tuple(signals or [f"z{k}" for k in range(nY)]), law)


def random_state_preserving_channel(rng: random.Random, n_states: int, n_from: int,
                                    n_to: int, denom: int = 6) -> list:
    """Channel over (t, y) that keeps t and garbles y -> z within each t."""
    rows = []
    for tp in range(n_states):
        for _ in range(n_from):
            row = [F(0)] * (n_states * n_to)
            for z, v in enumerate(random_distribution(rng, n_to, denom)):
                row[tp * n_to + z] = v
            rows.append(row)
    return rows


def random_partnership(rng: random.Random, n_signals: int = 2, n_states: int = 2,
                       denom: int = 12) -> PartnershipSpec:
    revenue = tuple(tuple(F(v) for v in sorted(rng.randint(0, 6) for _ in range(3)))
                    for _ in range(n_states))
    transition = tuple(tuple(random_distribution(rng, n_states, 6, True))
                       for _ in range(n_states))
    law = tuple(tuple(tuple(tuple(random_distribution(rng, n_signals, denom, True))
                            for _ in range(n_states)) for _ in range(3))
                for _ in range(n_states))
    return PartnershipSpec(2, F(1), revenue, transition,
                           tuple(f"y{k}" for k in range(n_signals)), law)


def materialize(name: str, params: dict):
    """Game and named monitors for a generator name and rational parameters."""
    p = {k: to_rational(v) for k, v in params.items()}
    if name == "example1":
        game, mon, mon_p = make_example1(p.get("eta", F(1, 4)), p.get("eta_p", F(1, 8)),
                                         p.get("eps", F(1, 2)), p.get("g", F(1, 2)),
                                         p.get("l", F(1, 4)))
        return game, {"Pi": mon, "PiPrime": mon_p}
    if name == "example2":
        game, mon, mon_p = make_example2(p.get("eps", F(1, 6)), p.get("g", F(1, 2)),
                                         p.get("l", F(1, 4)))
        return game, {"Pi": mon, "PiPrime": mon_p}
    if name == "pd":
        game = make_pd(p.get("g", F(1, 2)), p.get("l", F(1, 4)))
        mons = {"Perfect": perfect_monitoring(game),
                "Pi": pd_noisy_monitor(game, p.get("eta", F(1, 4)))}
        if "eta_p" in p:
            mons["PiPrime"] = pd_noisy_monitor(game, p["eta_p"])
        return game, mons
    raise ParameterError(f"unknown example {name!r}")
