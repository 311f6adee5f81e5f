"""Game files: a JSON document holding one game and its named monitors.

Layout (all tables dense, indexed by position as in :mod:`wgarbling.core`)::

    {"states": [...], "players": [...], "actions": [[...], ...],
     "payoffs": [s][a][i], "transition": [s][a][t],
     "monitors": {"Pi": {"signals": [...], "law": [s][a][t][y]}, ...},
     "generator": {"name": "example2", "params": {"eps": "1/6"}}}

Rationals are strings ``"num/den"`` (integers may also be bare JSON ints on
input).  ``generator`` is optional; when present the CLI can rebuild the
game with overridden parameters.  :func:`dumps` writes one top-level field
per line in a fixed order, so ``dumps(loads(text)) == text`` for any text
produced by :func:`dumps`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import MonitoringStructure, StochasticGame, to_rational, validate_game

FIELDS = ("states", "players", "actions", "payoffs", "transition", "monitors", "generator")


class GameFileError(ValueError):
    pass


@dataclass(frozen=True)
class GameDocument:
    game: StochasticGame
    monitors: dict  # name -> MonitoringStructure, in file order
    generator: Optional[dict] = None  # {"name": str, "params": {key: Fraction}}

    def monitor(self, name: str) -> MonitoringStructure:
        if name not in self.monitors:
            known = ", ".join(self.monitors) or "none"
            raise GameFileError(f"no monitor named {name!r} (known: {known})")
        return self.monitors[name]


def encode(obj):
    """Nested tables of rationals -> nested lists of "num/den" strings."""
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (Fraction, int)) and not isinstance(obj, bool):
        return str(Fraction(obj))
    return obj


def _decode(obj, path: str):
    if isinstance(obj, list):
        return tuple(_decode(v, f"{path}[{k}]") for k, v in enumerate(obj))
    if isinstance(obj, bool) or isinstance(obj, float) or not isinstance(obj, (int, str)):
        raise GameFileError(f"{path}: expected a rational, got {obj!r}")
    try:
        return to_rational(obj)
    except (ValueError, ZeroDivisionError) as exc:
        raise GameFileError(f"{path}: {exc}") from None


def _names(doc: dict, key: str) -> tuple:
    val = doc.get(key)
    if not isinstance(val, list) or not all(isinstance(v, str) for v in val):
        raise GameFileError(f"{key}: expected a list of names")
    return tuple(val)


def from_dict(doc: dict) -> GameDocument:
    if not isinstance(doc, dict):
        raise GameFileError("top level: expected an object")
    for key in ("states", "players", "actions", "payoffs", "transition"):
        if key not in doc:
            raise GameFileError(f"{key}: missing field")
    unknown = [k for k in doc if k not in FIELDS]
    if unknown:
        raise GameFileError(f"{unknown[0]}: unknown field")
    actions = doc["actions"]
    if not isinstance(actions, list) or not all(
            isinstance(a, list) and all(isinstance(x, str) for x in a) for a in actions):
        raise GameFileError("actions: expected one list of action names per player")
    game = StochasticGame(_names(doc, "states"), _names(doc, "players"),
                          tuple(tuple(a) for a in actions),
                          _decode(doc["payoffs"], "payoffs"),
                          _decode(doc["transition"], "transition"))
    monitors = {}
    raw = doc.get("monitors", {})
    if not isinstance(raw, dict):
        raise GameFileError("monitors: expected an object of named monitors")
    for name, body in raw.items():
        where = f"monitors.{name}"
        if not isinstance(body, dict) or set(body) != {"signals", "law"}:
            raise GameFileError(f"{where}: expected fields 'signals' and 'law'")
        sig = body["signals"]
        if not isinstance(sig, list) or not all(isinstance(v, str) for v in sig):
            raise GameFileError(f"{where}.signals: expected a list of names")
        monitors[name] = MonitoringStructure(tuple(sig), _decode(body["law"], f"{where}.law"))
    problems = _problems(game, [], "")
    if not problems:
        for name, mon in monitors.items():
            problems += _problems(game, [mon], f"monitors.{name}: ")
    if problems:
        raise GameFileError("; ".join(problems))
    gen = doc.get("generator")
    if gen is not None:
        if (not isinstance(gen, dict) or set(gen) != {"name", "params"}
                or not isinstance(gen["name"], str) or not isinstance(gen["params"], dict)):
            raise GameFileError("generator: expected fields 'name' and 'params'")
        gen = {"name": gen["name"],
               "params": {k: _decode(v, f"generator.params.{k}") for k, v in gen["params"].items()}}
    return GameDocument(game, monitors, gen)


def _problems(game, mons, prefix) -> list:
    try:
        return [prefix + p for p in validate_game(game, mons)]
    except TypeError:
        return [prefix + "a table has the wrong nesting depth"]


def to_dict(doc: GameDocument) -> dict:
    g = doc.game
    out = {
        "states": list(g.states),
        "players": list(g.players),
        "actions": [list(a) for a in g.actions],
        "payoffs": encode(g.payoff),
        "transition": encode(g.transition),
        "monitors": {name: {"signals": list(m.signals), "law": encode(m.law)}
                     for name, m in doc.monitors.items()},
    }
    if doc.generator is not None:
        out["generator"] = {"name": doc.generator["name"],
                            "params": encode(doc.generator["params"])}
    return out


def dumps(doc: GameDocument) -> str:
    data = to_dict(doc)
    lines = [f"  {json.dumps(k)}: {json.dumps(v, separators=(', ', ': '))}"
             for k, v in data.items()]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def loads(text: str) -> GameDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(data)


def load(path) -> GameDocument:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(doc: GameDocument, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def verdict_to_dict(verdict) -> dict:
    """A :class:`~wgarbling.garbling.GarblingVerdict` in the file encoding."""
    def key(k) -> str:
        return ",".join(str(v) for v in k) if isinstance(k, tuple) else str(k)

    out = {"holds": verdict.holds, "reason": verdict.reason}
    if verdict.witness is not None:
        out["witness"] = {key(k): {"weights": encode(b.weights), "channel": encode(b.channel)}
                          for k, b in verdict.witness.blocks.items()}
    if verdict.farkas:
        out["farkas"] = {key(k): encode(v) for k, v in verdict.farkas.items()}
    if verdict.support:
        out["support"] = {key(k): [list(c) for c in v] for k, v in verdict.support.items()}
    if verdict.channels:
        out["channels"] = {key(k): encode(v) for k, v in verdict.channels.items()}
    return out


def solution_to_dict(game: StochasticGame, sol, signals=None) -> dict:
    """A :class:`~wgarbling.scores.ScoreSolution` in the file encoding; the
    increments are keyed ``"s,t,y"`` by state and signal names."""
    def sig(y):
        return signals[y] if signals else str(y)

    out = {"direction": encode(sol.spec.direction), "mode": sol.spec.mode,
           "k": None if sol.k is None else encode(sol.k), "note": sol.note}
    if sol.feasible:
        out["profile"] = [encode(c) if isinstance(c, tuple) else c for c in sol.profile]
        out["v"] = encode(sol.v)
        out["x"] = {f"{game.states[s]},{game.states[t]},{sig(y)}": encode(vec)
                    for (s, t, y), vec in sol.x.items()}
        out["binding_cycles"] = [[game.states[s] for s in cyc] for cyc in sol.binding_cycles]
    return out
