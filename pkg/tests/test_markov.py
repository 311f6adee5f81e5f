import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from oracles import stationary_by_substitution
from wgarbling.apps import (garble_monitor, make_example2, make_pd, pd_noisy_monitor,
                            perfect_monitoring, random_distribution, random_game,
                            random_monitor, random_state_preserving_channel)
from wgarbling.core import MonitoringStructure, is_stage_nash, joint_kernel
from wgarbling.markov import (PreconditionError, check_admissible,
                              check_irreducible_all_pure_profiles,
                              check_same_invariants, cycle_edges, invariance_residual, lazy,
                              signed_invariant, simple_cycles, stationary,
                              verify_invariance_transfer)

H = F(1, 2)


def test_uniform_two_state():
    assert stationary([[H, H], [H, H]]) == (H, H)


def test_two_absorbing_states_not_unique():
    assert stationary([[F(1), F(0)], [F(0), F(1)]]) is None


def test_three_state_chain():
    Q = [[H, H, 0], [F(1, 3), F(1, 3), F(1, 3)], [0, H, H]]
    pi = stationary(Q)
    assert pi == (F(2, 7), F(3, 7), F(2, 7))
    assert tuple(stationary_by_substitution(Q)) == pi
    assert all(sum(pi[s] * Q[s][t] for s in range(3)) == pi[t] for t in range(3))


@given(st.integers(0, 10 ** 6), st.integers(2, 4))
def test_stationary_matches_substitution(seed, n):
    rng = random.Random(seed)
    Q = [random_distribution(rng, n, 6, full_support=True) for _ in range(n)]
    assert list(stationary(Q)) == stationary_by_substitution(Q)


def test_irreducibility():
    game, _, _ = make_example2(F(0))
    assert check_irreducible_all_pure_profiles(game.transition) == (True, None)
    q = [[[F(1), F(0)], [H, H]], [[H, H], [H, H]]]
    ok, prof = check_irreducible_all_pure_profiles(q)
    assert not ok and prof == (0, 0)


def test_same_invariants():
    rng = random.Random(3)
    game = random_game(rng, 3, [2, 2])
    q = game.transition
    assert check_same_invariants(q, q).same
    assert check_same_invariants(q, lazy(q)).same
    qp = [[list(r) for r in per] for per in q]
    qp[1][2] = [F(1), F(0), F(0)]
    cmp = check_same_invariants(q, qp)
    assert not cmp.same and cmp.profile is not None and cmp.profile[1] == 2


def test_invariance_transfer_genuine_mix():
    rng = random.Random(7)
    game = random_game(rng, 2, [2, 2])
    q = game.transition
    alpha = [[F(1, 4), F(1, 4), F(1, 4), F(1, 4)], [F(1, 2), 0, 0, F(1, 2)]]
    beta = signed_invariant(q, alpha)
    assert verify_invariance_transfer(q, lazy(q), alpha, beta) is None


def test_invariance_transfer_preconditions():
    rng = random.Random(8)
    q = random_game(rng, 2, [2, 2]).transition
    alpha = [[F(1), 0, 0, 0], [F(1), 0, 0, 0]]
    beta = signed_invariant(q, alpha)
    bad = [[[F(1), F(0)]] * 4, [[F(0), F(1)]] * 4]
    with pytest.raises(PreconditionError):
        verify_invariance_transfer(q, bad, alpha, beta)
    with pytest.raises(PreconditionError):
        verify_invariance_transfer(q, lazy(q), [[F(2), 0, 0, 0], [F(1), 0, 0, 0]], beta)


def test_simple_cycle_counts():
    assert [len(simple_cycles(n)) for n in range(1, 6)] == [1, 3, 8, 24, 89]
    assert cycle_edges((0, 2, 1)) == [(0, 2), (2, 1), (1, 0)]


def test_residual_zero_for_invariant():
    q = [[[H, H]], [[F(1, 4), F(3, 4)]]]
    alpha = [[F(1)], [F(1)]]
    beta = signed_invariant(q, alpha)
    assert beta == (F(1, 3), F(2, 3))
    assert invariance_residual(q, alpha, beta) == [0, 0]


def pure(game, choice):
    return [game.profiles[a] for a in choice]


def test_perfect_monitoring_makes_everything_admissible():
    rng = random.Random(21)
    game = random_game(rng, 2, [2, 2])
    kernel = joint_kernel(game, perfect_monitoring(game))
    for choice in itertools.product(range(4), repeat=2):
        assert check_admissible(game, kernel, pure(game, choice)).admissible


def test_action_independent_kernel_needs_stage_best_responses():
    rng = random.Random(22)
    game = random_game(rng, 1, [2, 2])
    flat = MonitoringStructure(("y0", "y1"), [[[[H, H]]] * 4])
    kernel = joint_kernel(game, flat)
    if any(game.transition[0][a] != game.transition[0][0] for a in range(4)):
        pytest.skip("transition depends on actions")
    for a in range(4):
        rep = check_admissible(game, kernel, [game.profiles[a]])
        assert rep.admissible == is_stage_nash(game, 0, a)
        if not rep.admissible:
            assert rep.violation[0] == 0 and rep.violation[3] > 0


def test_pd_cooperation_admissible_under_noise():
    game = make_pd()
    kernel = joint_kernel(game, pd_noisy_monitor(game, F(1, 4)))
    assert check_admissible(game, kernel, [(0, 0)]).admissible
    # the three non-cooperative profiles share a kernel column
    rep = check_admissible(game, kernel, [(0, 1)])
    assert not rep.admissible and rep.violation[1] == 0


def test_mixed_profile_input():
    game = make_pd()
    kernel = joint_kernel(game, pd_noisy_monitor(game, F(1, 4)))
    # against an even mix every deviation changes the chance of (C, C)
    assert check_admissible(game, kernel, [((H, H), (H, H))]).admissible
    # against sure defection player 1's actions are indistinguishable
    rep = check_admissible(game, kernel, [((H, H), (0, 1))])
    assert not rep.admissible and rep.violation[1] == 0
    assert rep.violation[2] == (0, 1) and rep.violation[3] == game.payoff[0][3][0] - (
        H * game.payoff[0][1][0] + H * game.payoff[0][3][0])


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6))
def test_admissibility_monotone_under_garbling(seed):
    rng = random.Random(seed)
    nS = rng.randint(1, 2)
    game = random_game(rng, nS, [2, 2])
    mon_p = random_monitor(rng, game, 3)
    mon = garble_monitor(game, mon_p, [random_state_preserving_channel(rng, nS, 3, 2)
                                       for _ in range(nS)])
    p, pp = joint_kernel(game, mon), joint_kernel(game, mon_p)
    for choice in itertools.product(range(4), repeat=nS):
        prof = pure(game, choice)
        if check_admissible(game, p, prof).admissible:
            assert check_admissible(game, pp, prof).admissible
