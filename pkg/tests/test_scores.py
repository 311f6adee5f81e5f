import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_pss, brute_force_score, pd_closed_form
from wgarbling.apps import (PartnershipSpec, garble_monitor, make_example1, make_partnership,
                            make_pd, partnership_flags, perfect_monitoring, pd_noisy_monitor,
                            random_game, random_monitor, random_partnership,
                            random_state_preserving_channel)
from wgarbling.core import MonitoringStructure, joint_kernel
from wgarbling.garbling import check_weighted_garbling
from wgarbling.markov import stationary
from wgarbling.scores import (BoundViolation, PolygonError, ScoreError, ScoreProgramSpec,
                              check_essentiality, check_feasible_point, directions_preset,
                              limit_polytope, polygon, solve_score, sse_interval,
                              transport_point, verify_block_construction,
                              verify_block_chain, verify_strict_improvement)

PD_TRIPLES = [(F(1, 4), F(1, 2), F(1, 4)), (F(1, 8), F(1, 3), F(1, 5)), (F(1, 3), F(1, 4), F(1, 2))]


@pytest.mark.parametrize("eta, g, l", PD_TRIPLES)
def test_pd_score_closed_form(eta, g, l):
    game = make_pd(g, l)
    sol = solve_score(game, pd_noisy_monitor(game, eta), ScoreProgramSpec((1, 1)))
    assert sol.k == pd_closed_form(eta, g)
    assert sol.profile == (0,)
    assert check_essentiality(sol, joint_kernel(game, pd_noisy_monitor(game, eta))).essential


def test_pd_perfect_monitoring_single_state():
    game = make_pd()
    sol = solve_score(game, perfect_monitoring(game), ScoreProgramSpec((1, 1)))
    assert sol.k == max(sum(u) for u in game.payoff[0])
    rep = check_essentiality(sol, joint_kernel(game, perfect_monitoring(game)))
    assert not rep.essential


def test_solution_is_feasible_and_binding_reported():
    game = make_pd()
    mon = pd_noisy_monitor(game, F(1, 4))
    kernel = joint_kernel(game, mon)
    sol = solve_score(game, mon, ScoreProgramSpec((1, 1)))
    assert check_feasible_point(game, kernel, sol.spec, sol.profile, sol.v, sol.x) == []
    assert sol.binding_cycles == ((0,),)
    assert sum(sol.spec.direction[i] * sol.v[i] for i in range(2)) == sol.k


def test_pruning_does_not_change_the_answer():
    rng = random.Random(4)
    game = random_game(rng, 2, [2, 2])
    mon = random_monitor(rng, game, 2)
    for d in directions_preset("compass-8"):
        a = solve_score(game, mon, ScoreProgramSpec(d))
        b = solve_score(game, mon, ScoreProgramSpec(d), prune=False)
        assert a.k == b.k and a.profile == b.profile


@settings(max_examples=12)
@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(2, 3))
def test_general_score_matches_brute_force(seed, nS, nY):
    rng = random.Random(seed)
    game = random_game(rng, nS, [2, 2])
    mon = random_monitor(rng, game, nY)
    lam = rng.choice(directions_preset("compass-8"))
    assert solve_score(game, mon, ScoreProgramSpec(lam)).k == brute_force_score(game, mon, lam)


@settings(max_examples=10)
@given(st.integers(0, 10 ** 6), st.sampled_from([1, -1]))
def test_pss_matches_brute_force(seed, sign):
    rng = random.Random(seed)
    game, mon = make_partnership(random_partnership(rng, rng.choice([2, 3]), 2))
    assert solve_score(game, mon, ScoreProgramSpec((sign,), "pss")).k == \
        brute_force_pss(game, mon, sign)


def test_perfect_monitoring_polygon():
    game = make_pd()
    poly = limit_polytope(game, perfect_monitoring(game), directions_preset("compass-8"))
    assert poly.scores == (F(3, 2), F(2), F(3, 2), F(7, 4), 0, 0, 0, F(7, 4))
    assert set(poly.vertices) == {(F(1, 2), F(3, 2)), (0, F(3, 2)), (0, 0), (F(3, 2), 0),
                                  (F(3, 2), F(1, 2))}
    # (1, 1) sits on the edge cut out by direction (1, 1)
    assert all(d[0] + d[1] <= k for d, k in poly.halfspaces())
    for vx in poly.vertices:
        tight = [d for d, k in poly.halfspaces() if d[0] * vx[0] + d[1] * vx[1] == k]
        assert len(tight) >= 2


def test_face_normals_recover_the_feasible_ir_quadrilateral():
    # compass-8 misses the normals of the two slanted faces; with them the
    # polygon is the feasible and individually rational set
    game = make_pd()
    dirs = [(2, 5), (5, 2), (-1, 0), (0, -1)]
    poly = limit_polytope(game, perfect_monitoring(game), dirs)
    assert set(poly.vertices) == {(1, 1), (0, F(7, 5)), (0, 0), (F(7, 5), 0)}


def test_polygon_needs_surrounding_directions():
    with pytest.raises(PolygonError):
        polygon([((1, 0), F(1)), ((-1, 0), F(1))])


def test_hset_inclusion_under_garbling():
    game = make_pd()
    mon, mon_p = pd_noisy_monitor(game, F(1, 4)), pd_noisy_monitor(game, F(1, 8))
    assert check_weighted_garbling(joint_kernel(game, mon), joint_kernel(game, mon_p)).holds
    dirs = directions_preset("compass-8")
    small = limit_polytope(game, mon, dirs)
    big = limit_polytope(game, mon_p, dirs)
    for vx in small.vertices:
        assert all(d[0] * vx[0] + d[1] * vx[1] <= k for d, k in big.halfspaces())


def test_strict_improvement_example1():
    eta, eta_p = F(1, 4), F(1, 8)
    game, mon, mon_p = make_example1(eta, eta_p, F(1, 2))
    rep = verify_strict_improvement(game, mon, mon_p, (1, 1))
    assert rep.preconditions_met and rep.improved
    assert rep.gap == pd_closed_form(eta_p, F(1, 2)) - pd_closed_form(eta, F(1, 2)) == F(1, 3)


def test_strict_improvement_knife_edge():
    game = make_pd()
    mon = pd_noisy_monitor(game, F(1, 4))
    rep = verify_strict_improvement(game, mon, mon, (1, 1))
    assert not rep.preconditions_met and rep.gap == 0
    pm = perfect_monitoring(game)
    rep = verify_strict_improvement(game, pm, pm, (1, 1))
    assert not rep.preconditions_met
    assert any("essential" in why for why in rep.unmet)


def shirking_partnership():
    half = (F(1, 2), F(1, 2))
    law = tuple(tuple(((F(2, 3) if k == 2 else F(1, 3), F(1, 3) if k == 2 else F(2, 3)),) * 2
                      for k in range(3)) for _ in range(2))
    spec = PartnershipSpec(2, F(1), ((F(0), F(1), F(3)), (F(0), F(1), F(4))), (half, half),
                           ("g", "b"), law)
    return make_partnership(spec)


def test_shirking_minimum_is_zero():
    game, mon = shirking_partnership()
    iv = sse_interval(game, mon)
    assert iv.lower == 0
    assert iv.minus.profile == (1, 1)


def test_uninformative_signal_leaves_only_stage_nash():
    # both all-effort and no-effort are stage equilibria here, so the
    # interval runs between their stationary payoffs
    game, _ = shirking_partnership()
    nS = game.n_states
    flat = MonitoringStructure(("g", "b"), [[[[F(1, 2), F(1, 2)]] * nS] * 4] * nS)
    iv = sse_interval(game, flat)
    pi = stationary([list(game.transition[s][0]) for s in range(nS)])
    value = [sum(pi[s] * game.payoff[s][a][0] for s in range(nS)) for a in (0, 3)]
    assert (iv.lower, iv.upper) == (value[1], value[0]) == (0, F(3, 4))
    assert iv.plus.profile == (0, 0) and iv.minus.profile == (1, 1)


def test_pss_monotone_under_garbling():
    rng = random.Random(9)
    spec = random_partnership(rng, 3, 2)
    game, mon_p = make_partnership(spec)
    chans = [random_state_preserving_channel(rng, 2, 3, 2) for _ in range(2)]
    mon = garble_monitor(game, mon_p, chans)
    assert sse_interval(game, mon).upper <= sse_interval(game, mon_p).upper


@settings(max_examples=8)
@given(st.integers(0, 10 ** 6))
def test_transport_point_is_feasible(seed):
    rng = random.Random(seed)
    nS = rng.randint(1, 2)
    game = random_game(rng, nS, [2, 2])
    mon_p = random_monitor(rng, game, 3)
    mon = garble_monitor(game, mon_p, [random_state_preserving_channel(rng, nS, 3, 2)
                                       for _ in range(nS)])
    p, pp = joint_kernel(game, mon), joint_kernel(game, mon_p)
    witness = check_weighted_garbling(p, pp).witness
    for d in directions_preset("compass-8"):
        sol = solve_score(game, p, ScoreProgramSpec(d))
        if sol.feasible:
            moved = transport_point(sol, witness.blocks, p, pp)
            assert check_feasible_point(game, pp, sol.spec, sol.profile, sol.v, moved) == []
            assert solve_score(game, pp, ScoreProgramSpec(d)).k >= sol.k


def test_spec_validation():
    with pytest.raises(ScoreError):
        ScoreProgramSpec((0, 0))
    with pytest.raises(ScoreError):
        ScoreProgramSpec((1, 1), "pss")
    with pytest.raises(ScoreError):
        ScoreProgramSpec((1,), "ss", grid=((F(1, 2), F(1, 3)),))
    rng = random.Random(1)
    game = random_game(rng, 1, [2, 2])
    if game.payoff[0][1] != tuple(reversed(game.payoff[0][2])):
        with pytest.raises(ScoreError):
            solve_score(game, random_monitor(rng, game, 2), ScoreProgramSpec((1,), "pss"))


def test_ss_grid_includes_pure_points():
    game, mon = shirking_partnership()
    grid = ((F(1), F(0)), (F(1, 2), F(1, 2)), (F(0), F(1)))
    ss = sse_interval(game, mon, pure=False, grid=grid)
    pss = sse_interval(game, mon)
    assert ss.upper >= pss.upper and ss.lower <= pss.lower


def test_block_bound_violation_reported():
    game, mon = shirking_partnership()
    iv = sse_interval(game, mon)
    pts = {1: iv.plus, -1: iv.minus}
    v_plus = iv.plus.v[0]
    with pytest.raises(BoundViolation):
        verify_block_construction(game, mon, 1, v_plus, (iv.lower, v_plus), 4, F(99, 100), pts)


def test_block_degenerate_single_state():
    game = make_pd()
    mon = pd_noisy_monitor(game, F(1, 4))
    sol = solve_score(game, mon, ScoreProgramSpec((-1,), "pss"))
    assert sol.profile == (1,) and all(v == (0,) for v in sol.x.values())
    z = sol.v[0]
    rep = verify_block_construction(game, mon, -1, z, (z, z + 1), 3, F(9, 10),
                                    {-1: sol, 1: sol}, enforce_bounds=False)
    assert rep.item1 and not rep.item2
    assert all(w == z for w in rep.continuation.values())


def test_two_consecutive_blocks():
    from test_acceptance import BLOCK_SPEC
    game, mon = make_partnership(BLOCK_SPEC)
    iv = sse_interval(game, mon)
    width = iv.upper - iv.lower
    Z = (iv.lower + width / 4, iv.upper - width / 4)
    rep = verify_block_chain(game, mon, (Z[0] + Z[1]) / 2 - width / 8, Z, 4, F(99, 100),
                             {1: iv.plus, -1: iv.minus}, enforce_bounds=False)
    assert rep.passed and len(rep.second) > 1
    assert all(Z[0] <= w <= Z[1] for w in rep.second)


def test_effort_everywhere_outside_stage_nash_is_essential():
    # action-independent transitions: when the best pure symmetric profile has
    # effort at every state and effort is never a stage equilibrium, the
    # signal must burn score on every binding cycle
    qualifying = 0
    for seed in range(150):
        rng = random.Random(seed)
        spec = random_partnership(rng, rng.choice([2, 3]), 2)
        game, mon = make_partnership(spec)
        sol = solve_score(game, mon, ScoreProgramSpec((1,), "pss"))
        if not sol.feasible:
            continue
        flags = partnership_flags(spec)
        if all(sol.profile[s] == 0 and not flags[game.states[s]]["full_effort_nash"]
               for s in range(game.n_states)):
            qualifying += 1
            assert check_essentiality(sol, joint_kernel(game, mon), game=game).essential
    assert qualifying >= 5
