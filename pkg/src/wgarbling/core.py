"""Exact data model for finite stochastic games with public monitoring.

Tables are dense nested tuples indexed by position.  Action profiles are
enumerated in ``itertools.product`` order over the players' action lists,
and every table that depends on a profile is indexed by that enumeration.

* ``game.payoff[s][a][i]``          stage payoff u_i(a, s)
* ``game.transition[s][a][t]``      q(t | s, a)
* ``mon.law[s][a][t][y]``           f(y | t, s, a)
* ``kernel.p[s][a][t][y]``          p(t, y | s, a) = q(t|s,a) f(y|t,s,a)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

Rational = Fraction


def to_rational(x) -> Fraction:
    """Parse an exact scalar: int, Fraction, or a ``"num/den"`` string."""
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        text = x.strip()
        if any(ch in text for ch in ".eE"):
            raise ValueError(f"decimal literal {x!r}; write it as num/den")
        return Fraction(text)
    raise TypeError(f"cannot read {x!r} as an exact rational")


def fmt(x: Fraction) -> str:
    return str(x)


def _freeze(obj):
    if isinstance(obj, (list, tuple)):
        return tuple(_freeze(v) for v in obj)
    return to_rational(obj)


@dataclass(frozen=True)
class StochasticGame:
    states: tuple
    players: tuple
    actions: tuple  # actions[i] is the ordered action list of player i
    payoff: tuple
    transition: tuple

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "actions", tuple(tuple(a) for a in self.actions))
        object.__setattr__(self, "payoff", _freeze(self.payoff))
        object.__setattr__(self, "transition", _freeze(self.transition))

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_players(self) -> int:
        return len(self.players)

    @cached_property
    def profiles(self) -> tuple:
        """All pure profiles as tuples of per-player action indices."""
        return tuple(itertools.product(*(range(len(a)) for a in self.actions)))

    @cached_property
    def _profile_pos(self) -> dict:
        return {a: k for k, a in enumerate(self.profiles)}

    def profile_index(self, profile: Sequence[int]) -> int:
        return self._profile_pos[tuple(profile)]

    def profile_label(self, k: int) -> str:
        return ",".join(self.actions[i][ai] for i, ai in enumerate(self.profiles[k]))

    def deviate(self, k: int, player: int, action: int) -> int:
        prof = list(self.profiles[k])
        prof[player] = action
        return self.profile_index(prof)

    def unilateral_set(self, k: int) -> list:
        """Profile ``k`` followed by every unilateral pure deviation from it."""
        out = [k]
        for i in range(self.n_players):
            for b in range(len(self.actions[i])):
                j = self.deviate(k, i, b)
                if j not in out:
                    out.append(j)
        return out

    def is_action_independent(self) -> bool:
        return all(len(set(row)) == 1 for row in self.transition)


@dataclass(frozen=True)
class MonitoringStructure:
    signals: tuple
    law: tuple  # law[s][a][t][y]

    def __post_init__(self):
        object.__setattr__(self, "signals", tuple(self.signals))
        object.__setattr__(self, "law", _freeze(self.law))


@dataclass(frozen=True)
class JointKernel:
    states: tuple
    signals: tuple
    n_profiles: int
    p: tuple  # p[s][a][t][y]

    def __post_init__(self):
        object.__setattr__(self, "p", _freeze(self.p))

    def columns(self) -> list:
        """(t, y) index pairs in row-major order."""
        return [(t, y) for t in range(len(self.states)) for y in range(len(self.signals))]

    def column(self, s: int, a: int) -> list:
        """p(., . | s, a) flattened over ``columns()``."""
        return [v for row in self.p[s][a] for v in row]

    def mix(self, s: int, weights: Sequence[Fraction]) -> list:
        """Flattened p(., . | s, alpha) for profile weights ``weights``."""
        ncol = len(self.states) * len(self.signals)
        out = [Fraction(0)] * ncol
        for a, w in enumerate(weights):
            if w:
                for c, v in enumerate(self.column(s, a)):
                    out[c] += w * v
        return out


def validate_game(game: StochasticGame, monitors: Sequence[MonitoringStructure] = ()) -> list:
    """Every violated invariant, as human-readable strings (empty when valid)."""
    out = []
    nS, nA = game.n_states, len(game.profiles)
    if len(set(game.states)) != nS:
        out.append("duplicate state names")
    if len(game.actions) != game.n_players:
        out.append("action list count differs from player count")
        return out
    if len(game.payoff) != nS:
        out.append(f"payoff table has {len(game.payoff)} states, expected {nS}")
    if len(game.transition) != nS:
        out.append(f"transition table has {len(game.transition)} states, expected {nS}")
    for s in range(min(nS, len(game.payoff))):
        if len(game.payoff[s]) != nA:
            out.append(f"payoff at state {game.states[s]}: {len(game.payoff[s])} profiles, "
                       f"expected {nA}")
            continue
        for a in range(nA):
            if len(game.payoff[s][a]) != game.n_players:
                out.append(f"payoff at (s={game.states[s]}, a={game.profile_label(a)}) "
                           f"has {len(game.payoff[s][a])} entries")
    for s in range(min(nS, len(game.transition))):
        if len(game.transition[s]) != nA:
            out.append(f"transition at state {game.states[s]}: wrong profile count")
            continue
        for a in range(nA):
            row = game.transition[s][a]
            where = f"(s={game.states[s]}, a={game.profile_label(a)})"
            if len(row) != nS:
                out.append(f"transition row {where} has length {len(row)}")
                continue
            for t, v in enumerate(row):
                if v < 0:
                    out.append(f"q({game.states[t]}|{where[1:-1]}) = {v} is negative")
            if sum(row) != 1:
                out.append(f"transition row {where} sums to {sum(row)}")
    for mon in monitors:
        out.extend(validate_monitor(game, mon))
    return out


def validate_monitor(game: StochasticGame, mon: MonitoringStructure) -> list:
    out = []
    nS, nA, nY = game.n_states, len(game.profiles), len(mon.signals)
    if len(mon.law) != nS or any(len(mon.law[s]) != nA for s in range(len(mon.law))):
        return ["monitoring law does not match the game's states and profiles"]
    for s in range(nS):
        for a in range(nA):
            if len(mon.law[s][a]) != nS:
                out.append(f"signal law at (s={game.states[s]}, a={game.profile_label(a)}) "
                           "has wrong next-state count")
                continue
            for t in range(nS):
                row = mon.law[s][a][t]
                where = f"(t={game.states[t]}, s={game.states[s]}, a={game.profile_label(a)})"
                if len(row) != nY:
                    out.append(f"signal row {where} has length {len(row)}")
                    continue
                if any(v < 0 for v in row):
                    out.append(f"signal row {where} has a negative entry")
                if sum(row) != 1:
                    out.append(f"signal row {where} sums to {sum(row)}")
    return out


class DimensionMismatch(ValueError):
    pass


def joint_kernel(game: StochasticGame, mon: MonitoringStructure) -> JointKernel:
    nS, nA = game.n_states, len(game.profiles)
    if len(mon.law) != nS or any(len(mon.law[s]) != nA for s in range(nS)):
        raise DimensionMismatch("monitoring structure does not match the game")
    p = []
    for s in range(nS):
        ps = []
        for a in range(nA):
            if len(mon.law[s][a]) != nS:
                raise DimensionMismatch("signal law has wrong next-state count")
            ps.append([[game.transition[s][a][t] * f for f in mon.law[s][a][t]]
                       for t in range(nS)])
        p.append(ps)
    return JointKernel(game.states, mon.signals, nA, p)


# ---------------------------------------------------------------------------
# mixtures and symmetric views


def profile_weights(game: StochasticGame, mixed: Sequence[Sequence[Fraction]]) -> list:
    """Product weights over pure profiles for per-player (possibly signed) mixtures."""
    out = []
    for prof in game.profiles:
        w = Fraction(1)
        for i, ai in enumerate(prof):
            w *= mixed[i][ai]
        out.append(w)
    return out


def expected_payoff(game: StochasticGame, s: int, weights: Sequence[Fraction]) -> list:
    out = [Fraction(0)] * game.n_players
    for a, w in enumerate(weights):
        if w:
            for i in range(game.n_players):
                out[i] += w * game.payoff[s][a][i]
    return out


def expected_transition(game: StochasticGame, s: int, weights: Sequence[Fraction]) -> list:
    out = [Fraction(0)] * game.n_states
    for a, w in enumerate(weights):
        if w:
            for t in range(game.n_states):
                out[t] += w * game.transition[s][a][t]
    return out


def symmetric_weights(game: StochasticGame, mix: Sequence[Fraction],
                      deviator_action: Optional[int] = None) -> list:
    """Profile weights when everyone plays ``mix``, except player 0 who plays
    ``deviator_action`` (pure) if given."""
    n = game.n_players
    per = [list(mix) for _ in range(n)]
    if deviator_action is not None:
        per[0] = [Fraction(int(b == deviator_action)) for b in range(len(mix))]
    return profile_weights(game, per)


def pure_mix(n_actions: int, b: int) -> tuple:
    return tuple(Fraction(int(j == b)) for j in range(n_actions))


def symmetrize_check(game: StochasticGame, monitors: Sequence[MonitoringStructure] = ()):
    """None when the game (and monitors) are symmetric, else the first player
    permutation (as a tuple ``xi`` with ``xi[i]`` the image of player i) that
    breaks payoff, transition or signal invariance."""
    if len(set(game.actions)) != 1:
        return tuple(range(game.n_players))
    n = game.n_players
    for xi in itertools.permutations(range(n)):
        if xi == tuple(range(n)):
            continue
        for a, prof in enumerate(game.profiles):
            permuted = [0] * n
            for i in range(n):
                permuted[xi[i]] = prof[i]
            b = game.profile_index(permuted)
            for s in range(game.n_states):
                for i in range(n):
                    if game.payoff[s][b][xi[i]] != game.payoff[s][a][i]:
                        return xi
                if game.transition[s][b] != game.transition[s][a]:
                    return xi
                for mon in monitors:
                    if mon.law[s][b] != mon.law[s][a]:
                        return xi
    return None


def is_stage_nash(game: StochasticGame, s: int, a: int) -> bool:
    for i in range(game.n_players):
        for b in range(len(game.actions[i])):
            if game.payoff[s][game.deviate(a, i, b)][i] > game.payoff[s][a][i]:
                return False
    return True
