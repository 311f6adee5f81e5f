"""Command-line front end.

Exit codes: 0 = the checked property holds, 1 = it fails, 2 = input error,
3 = a verification's preconditions are not met.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import apps, gamefile, garbling, scores
from .core import DimensionMismatch, joint_kernel, to_rational

EXIT_HOLDS, EXIT_FAILS, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3
CHECKS = ("expost", "joint", "weighted", "strict-weighted", "p-weighted")
GENERATOR_PARAMS = ("eps", "eta", "eta_p", "g", "l")


class InputError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return to_rational(text)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(str(exc)) from None


def _params(pairs: Sequence[str]) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise InputError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _rational(v)
    return out


def _vector(text: str) -> tuple:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise InputError("empty direction")
    vec = tuple(_rational(p) for p in parts)
    if not any(vec):
        raise InputError("direction must be nonzero")
    return vec


def _load(path: str, params: dict) -> gamefile.GameDocument:
    try:
        doc = gamefile.load(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except gamefile.GameFileError as exc:
        raise InputError(f"{path}: {exc}") from None
    if params:
        if doc.generator is None:
            raise InputError(f"{path}: --param needs a file with generator metadata")
        merged = dict(doc.generator["params"])
        merged.update(params)
        try:
            game, mons = apps.materialize(doc.generator["name"], merged)
        except (apps.ParameterError, ValueError) as exc:
            raise InputError(str(exc)) from None
        doc = gamefile.GameDocument(game, mons, {"name": doc.generator["name"],
                                                 "params": merged})
    return doc


def _monitor(doc: gamefile.GameDocument, name: str):
    try:
        return doc.monitor(name)
    except gamefile.GameFileError as exc:
        raise InputError(str(exc)) from None


def _num(x: Optional[Fraction], approx: bool) -> str:
    if x is None:
        return "-inf"
    return f"{x} (~{float(x):.6g})" if approx else str(x)


def _json(data, out) -> None:
    out.write(json.dumps(data, indent=2) + "\n")


def _writer(out):
    return csv.writer(out, lineterminator="\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args, out) -> int:
    doc = _load(args.game, _params(args.param))
    mon_a, mon_b = _monitor(doc, args.mon_a), _monitor(doc, args.mon_b)
    game = doc.game
    if args.kind == "expost":
        verdict = garbling.check_expost_garbling(mon_a, mon_b)
    else:
        p, pp = joint_kernel(game, mon_a), joint_kernel(game, mon_b)
        if args.kind == "joint":
            verdict = garbling.check_joint_garbling(p, pp)
        elif args.kind == "weighted":
            verdict = garbling.check_weighted_garbling(p, pp)
        elif args.kind == "strict-weighted":
            verdict = garbling.check_strict_weighted_garbling(p, pp)
        else:
            labels = {game.profile_label(k): k for k in range(len(game.profiles))}
            if args.target:
                try:
                    targets = [labels[t] for t in args.target]
                except KeyError as exc:
                    raise InputError(f"unknown profile {exc.args[0]!r}; "
                                     f"known: {' '.join(labels)}") from None
            else:
                targets = list(range(len(game.profiles)))
            verdict = garbling.check_p_weighted_garbling(
                p, pp, targets, game.unilateral_set, strict=args.strict)
    if args.csv:
        w = _writer(out)
        w.writerow(["state", "feasible", "max_weight"])
        for s in range(game.n_states):
            keys = [k for k in _verdict_keys(verdict) if (k[0] if isinstance(k, tuple) else k) == s]
            feasible = verdict.holds or not any(k in verdict.farkas for k in keys)
            mw = ""
            if verdict.witness is not None:
                mw = max((verdict.witness.blocks[k].max_weight() for k in keys
                          if k in verdict.witness.blocks), default="")
            w.writerow([game.states[s], str(feasible).lower(), str(mw)])
    elif args.json:
        _json(gamefile.verdict_to_dict(verdict), out)
    else:
        out.write(f"{args.kind} garbling of {args.mon_b} into {args.mon_a}: "
                  f"{'holds' if verdict.holds else 'fails'}\n")
        if verdict.reason:
            out.write(f"reason: {verdict.reason}\n")
        if verdict.witness is not None:
            for key, blk in verdict.witness.blocks.items():
                out.write(f"block {key}: max weight {_num(blk.max_weight(), args.approx)}\n")
        for key, cert in verdict.farkas.items():
            out.write(f"Farkas certificate {key}: {' '.join(str(v) for v in cert)}\n")
        for key, sup in verdict.support.items():
            out.write(f"common support {key}: {list(sup)}\n")
    return EXIT_HOLDS if verdict.holds else EXIT_FAILS


def _verdict_keys(verdict) -> list:
    keys = list(verdict.farkas)
    if verdict.witness is not None:
        keys += list(verdict.witness.blocks)
    keys += list(verdict.channels)
    return keys


def _profile_text(game, sol: scores.ScoreSolution) -> str:
    if sol.profile is None:
        return ""
    parts = []
    for s, choice in enumerate(sol.profile):
        if sol.spec.mode == "general":
            label = game.profile_label(choice)
        elif sol.spec.mode == "pss":
            label = game.actions[0][choice]
        else:
            label = "(" + ",".join(str(v) for v in choice) + ")"
        parts.append(f"{game.states[s]}:{label}")
    return ";".join(parts)


def _dir_text(d) -> str:
    return ",".join(str(v) for v in d)


def cmd_score(args, out) -> int:
    doc = _load(args.game, _params(args.param))
    mon = _monitor(doc, args.mon)
    spec = scores.ScoreProgramSpec(_vector(args.lam), args.mode)
    sol = scores.solve_score(doc.game, mon, spec)
    if args.json:
        _json(gamefile.solution_to_dict(doc.game, sol, mon.signals), out)
    elif args.csv:
        w = _writer(out)
        w.writerow(["direction", "k", "profile"])
        w.writerow([_dir_text(spec.direction), _num(sol.k, False), _profile_text(doc.game, sol)])
    else:
        out.write(f"direction ({_dir_text(spec.direction)}): k = {_num(sol.k, args.approx)}\n")
        if sol.feasible:
            out.write(f"profile: {_profile_text(doc.game, sol)}\n")
            out.write(f"v = ({', '.join(_num(v, args.approx) for v in sol.v)})\n")
            out.write(f"LPs solved: {sol.lp_solved} ({sol.note})\n")
    return EXIT_HOLDS


def _directions(args) -> tuple:
    if args.lam:
        return tuple(_vector(v) for v in args.lam)
    try:
        return scores.directions_preset(args.directions)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_hset(args, out) -> int:
    doc = _load(args.game, _params(args.param))
    mon = _monitor(doc, args.mon)
    dirs = _directions(args)
    poly = scores.limit_polytope(doc.game, mon, dirs, polygon_mode=False)
    verts = None
    if doc.game.n_players == 2:
        try:
            verts = scores.polygon(poly.halfspaces())
        except scores.PolygonError as exc:
            if args.csv:
                raise InputError(str(exc)) from None
            if not args.json:
                out.write(f"no polygon: {exc}\n")
    if args.json:
        data = {"scores": [gamefile.solution_to_dict(doc.game, sol, mon.signals)
                           for sol in poly.solutions]}
        if verts is not None:
            data["vertices"] = gamefile.encode(verts)
        _json(data, out)
        return EXIT_HOLDS
    if args.csv:
        w = _writer(out)
        if verts is None:
            w.writerow(["direction", "k", "profile"])
            for d, sol in zip(poly.directions, poly.solutions):
                w.writerow([_dir_text(d), _num(sol.k, False), _profile_text(doc.game, sol)])
        else:
            w.writerow(["x", "y"])
            for x, y in verts:
                w.writerow([str(x), str(y)])
        return EXIT_HOLDS
    for d, sol in zip(poly.directions, poly.solutions):
        out.write(f"k({_dir_text(d)}) = {_num(sol.k, args.approx)}  "
                  f"[{_profile_text(doc.game, sol)}]\n")
    if verts is not None:
        out.write("vertices (counter-clockwise):\n")
        for x, y in verts:
            out.write(f"  ({_num(x, args.approx)}, {_num(y, args.approx)})\n")
    return EXIT_HOLDS


def cmd_sse(args, out) -> int:
    doc = _load(args.game, _params(args.param))
    mon = _monitor(doc, args.mon)
    grid = None
    if args.grid:
        grid = tuple(_vector(g) for g in args.grid)
    iv = scores.sse_interval(doc.game, mon, pure=grid is None, grid=grid)
    if args.json:
        _json({"lower": gamefile.encode(iv.lower), "upper": gamefile.encode(iv.upper),
               "empty": iv.empty,
               "plus": gamefile.solution_to_dict(doc.game, iv.plus, mon.signals),
               "minus": gamefile.solution_to_dict(doc.game, iv.minus, mon.signals)}, out)
    elif args.csv:
        w = _writer(out)
        w.writerow(["direction", "k", "profile"])
        for lam, sol in ((1, iv.plus), (-1, iv.minus)):
            w.writerow([str(lam), _num(sol.k, False), _profile_text(doc.game, sol)])
    else:
        out.write(f"k(+1) = {_num(iv.upper, args.approx)}  [{_profile_text(doc.game, iv.plus)}]\n")
        out.write(f"-k(-1) = {_num(iv.lower, args.approx)}  "
                  f"[{_profile_text(doc.game, iv.minus)}]\n")
        out.write("interval is empty\n" if iv.empty else
                  f"interval [{_num(iv.lower, args.approx)}, {_num(iv.upper, args.approx)}]\n")
    return EXIT_HOLDS


def _verify_monotone(args, out) -> int:
    doc = _load(args.game, _params(args.param))
    mon, mon_p = _monitor(doc, args.mon), _monitor(doc, args.mon_p)
    p, pp = joint_kernel(doc.game, mon), joint_kernel(doc.game, mon_p)
    verdict = garbling.check_weighted_garbling(p, pp)
    if not verdict.holds:
        out.write(f"precondition fails: {args.mon} is not a weighted garbling of "
                  f"{args.mon_p} ({verdict.reason})\n")
        return EXIT_PRECONDITION
    failures = 0
    for d in _directions(args):
        spec = scores.ScoreProgramSpec(d)
        sol = scores.solve_score(doc.game, p, spec)
        sol_p = scores.solve_score(doc.game, pp, spec)
        ok = sol.k is None or (sol_p.k is not None and sol_p.k >= sol.k)
        note = ""
        if sol.feasible:
            x_p = scores.transport_point(sol, verdict.witness.blocks, p, pp)
            bad = scores.check_feasible_point(doc.game, pp, spec, sol.profile, sol.v, x_p)
            note = "transport ok" if not bad else f"transport fails: {bad[0]}"
            ok = ok and not bad
        failures += not ok
        out.write(f"({_dir_text(d)}): k = {_num(sol.k, args.approx)}, "
                  f"k' = {_num(sol_p.k, args.approx)}  {note}\n")
    out.write("monotonicity verified\n" if not failures else f"{failures} direction(s) fail\n")
    return EXIT_HOLDS if not failures else EXIT_FAILS


def _verify_strict(args, out) -> int:
    doc = _load(args.game, _params(args.param))
    mon, mon_p = _monitor(doc, args.mon), _monitor(doc, args.mon_p)
    rep = scores.verify_strict_improvement(doc.game, mon, mon_p, _vector(args.lam))
    out.write(f"k = {_num(rep.k, args.approx)}, k' = {_num(rep.k_prime, args.approx)}\n")
    if not rep.preconditions_met:
        for why in rep.unmet:
            out.write(f"precondition fails: {why}\n")
        return EXIT_PRECONDITION
    out.write(f"gap = {_num(rep.gap, args.approx)}\n")
    return EXIT_HOLDS if rep.improved else EXIT_FAILS


def _verify_block(args, out) -> int:
    doc = _load(args.game, _params(args.param))
    mon = _monitor(doc, args.mon)
    game = doc.game
    points = {}
    for lam in (1, -1):
        sol = scores.solve_score(game, mon, scores.ScoreProgramSpec((lam,), "pss"))
        if not sol.feasible:
            out.write(f"precondition fails: symmetric score in direction {lam} is -inf\n")
            return EXIT_PRECONDITION
        points[lam] = sol
    if args.Z:
        lo, hi = (_rational(v) for v in args.Z.split(","))
    else:
        a, b = -points[-1].k, points[1].k
        lo, hi = a + (b - a) / 4, b - (b - a) / 4
    z = _rational(args.z)
    lam = args.lam_sign or scores.choose_direction(z, (lo, hi))
    try:
        rep = scores.verify_block_construction(game, mon, lam, z, (lo, hi), args.n,
                                               _rational(args.delta), points,
                                               enforce_bounds=args.enforce_bounds)
    except scores.BoundViolation as exc:
        out.write(f"precondition fails: {exc}\n")
        return EXIT_PRECONDITION
    for name, ok, detail in rep.bounds:
        out.write(f"bound {'ok  ' if ok else 'FAIL'} {name}: {detail}\n")
    out.write(f"histories: {rep.histories}\n")
    out.write(f"item 1 (z is an equilibrium payoff of the block game): "
              f"{'pass' if rep.item1 else 'FAIL'}\n")
    out.write(f"item 2 (lam * w < lam * z on every history): {'pass' if rep.item2 else 'FAIL'}\n")
    out.write(f"range (w in Z): {'pass' if rep.in_range else 'FAIL'}\n")
    return EXIT_HOLDS if rep.passed else EXIT_FAILS


def cmd_verify(args, out) -> int:
    return {"monotone": _verify_monotone, "strict": _verify_strict,
            "block": _verify_block}[args.what](args, out)


def cmd_example(args, out) -> int:
    if args.action == "list":
        out.write("example1  params: eta eta_p eps g l\n"
                  "example2  params: eps g l\n"
                  "pd        params: g l eta [eta_p]\n")
        return EXIT_HOLDS
    params = _params(args.param)
    for key in GENERATOR_PARAMS:
        val = getattr(args, key)
        if val is not None:
            params[key] = _rational(val)
    try:
        game, mons = apps.materialize(args.name, params)
    except (apps.ParameterError, ValueError) as exc:
        raise InputError(str(exc)) from None
    text = gamefile.dumps(gamefile.GameDocument(game, mons, {"name": args.name,
                                                             "params": params}))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_HOLDS


def cmd_validate(args, out) -> int:
    doc = _load(args.game, {})
    g = doc.game
    out.write(f"ok: {g.n_states} states, {g.n_players} players, "
              f"{len(g.profiles)} profiles, monitors: {', '.join(doc.monitors) or 'none'}\n")
    return EXIT_HOLDS


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wgarbling", description=(
        "Garbling orders, score programs and limit payoff sets for stochastic games "
        "with public monitoring, in exact rational arithmetic."))
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, csv_flag=True):
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="override a generator parameter (files with generator metadata)")
        p.add_argument("--approx", action="store_true", help="add decimal approximations")
        if csv_flag:
            p.add_argument("--csv", action="store_true", help="machine-readable CSV output")
            p.add_argument("--json", action="store_true", help="structured JSON output")

    p = sub.add_parser("check", help="decide a garbling order between two monitors")
    p.add_argument("kind", choices=CHECKS)
    p.add_argument("game")
    p.add_argument("mon_a", help="the monitor claimed to be the garbling (Pi)")
    p.add_argument("mon_b", help="the more informative monitor (Pi')")
    p.add_argument("--target", action="append", help="p-weighted: target profile label, e.g. C,C")
    p.add_argument("--strict", action="store_true", help="p-weighted: strict variant")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("score", help="solve the score program in one direction")
    p.add_argument("game")
    p.add_argument("mon")
    p.add_argument("--lambda", dest="lam", required=True, help="direction, e.g. 1,1")
    p.add_argument("--mode", choices=scores.MODES, default="general")
    common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("hset", help="scores over a direction set and the payoff polygon")
    p.add_argument("game")
    p.add_argument("mon")
    p.add_argument("--directions", default="compass-8", help="compass-8 or compass-16")
    p.add_argument("--lambda", dest="lam", action="append", help="explicit direction (repeatable)")
    common(p)
    p.set_defaults(func=cmd_hset)

    p = sub.add_parser("sse", help="strongly symmetric payoff interval")
    p.add_argument("game")
    p.add_argument("mon")
    p.add_argument("--grid", action="append",
                   help="symmetric mixture to include (repeatable); default: pure actions")
    common(p)
    p.set_defaults(func=cmd_sse)

    p = sub.add_parser("verify", help="verify monotonicity, strict improvement or a block")
    vsub = p.add_subparsers(dest="what", required=True)
    q = vsub.add_parser("monotone")
    q.add_argument("game")
    q.add_argument("mon")
    q.add_argument("mon_p")
    q.add_argument("--directions", default="compass-8")
    q.add_argument("--lambda", dest="lam", action="append")
    common(q, csv_flag=False)
    q = vsub.add_parser("strict")
    q.add_argument("game")
    q.add_argument("mon")
    q.add_argument("mon_p")
    q.add_argument("--lambda", dest="lam", required=True)
    common(q, csv_flag=False)
    q = vsub.add_parser("block")
    q.add_argument("game")
    q.add_argument("mon")
    q.add_argument("--z", required=True)
    q.add_argument("--Z", help="target interval lo,hi (default: middle half of the SSE interval)")
    q.add_argument("--n", type=int, default=4)
    q.add_argument("--delta", default="99/100")
    q.add_argument("--lam-sign", type=int, choices=(-1, 1), dest="lam_sign")
    q.add_argument("--enforce-bounds", action="store_true",
                   help="treat the parameter inequalities as preconditions")
    common(q, csv_flag=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", help="materialize a built-in example as a game file")
    esub = p.add_subparsers(dest="action", required=True)
    esub.add_parser("list")
    q = esub.add_parser("make")
    q.add_argument("name")
    q.add_argument("-o", "--output")
    q.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    for key in GENERATOR_PARAMS:
        q.add_argument(f"--{key.replace('_', '-')}", dest=key)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("validate", help="parse and validate a game file")
    p.add_argument("game")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_HOLDS
    try:
        return args.func(args, out)
    except (InputError, gamefile.GameFileError, DimensionMismatch,
            garbling.GarblingInputError, scores.ScoreError, scores.PolygonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
