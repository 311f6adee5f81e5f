import random
from fractions import Fraction as F

import pytest

from wgarbling.apps import (ParameterError, make_example1, make_example2, make_partnership,
                            make_pd, materialize, partnership_flags, partnership_payoff,
                            pd_noisy_monitor, random_partnership)
from wgarbling.core import validate_game


def test_pd_is_symmetric():
    game = make_pd(F(1, 3), F(1, 5))
    for a, prof in enumerate(game.profiles):
        swapped = game.profiles.index(tuple(reversed(prof)))
        assert game.payoff[0][a] == tuple(reversed(game.payoff[0][swapped]))
    assert game.payoff[0][0] == (1, 1) and game.payoff[0][3] == (0, 0)
    assert game.payoff[0][2] == (F(4, 3), F(-1, 5))


def test_noisy_monitor_probabilities():
    game = make_pd()
    mon = pd_noisy_monitor(game, F(1, 5))
    assert mon.law[0][0][0] == (F(4, 5), F(1, 5))
    assert all(mon.law[0][a][0] == (F(1, 5), F(4, 5)) for a in (1, 2, 3))


@pytest.mark.parametrize("seed", range(5))
def test_partnership_payoffs_follow_effort_count(seed):
    spec = random_partnership(random.Random(seed), 2, 2)
    game, mon = make_partnership(spec)
    assert validate_game(game, [mon]) == []
    for s in range(2):
        for a, prof in enumerate(game.profiles):
            k = prof.count(0)
            for i in range(2):
                assert game.payoff[s][a][i] == partnership_payoff(spec, s, k, prof[i] == 0)
                assert game.transition[s][a] == spec.transition[s]
            assert mon.law[s][a] == spec.signal_law[s][k]


def test_stage_nash_flags():
    spec = random_partnership(random.Random(0), 2, 2)
    flags = partnership_flags(spec)
    for s, name in enumerate(spec.state_names()):
        r = spec.revenue[s]
        assert flags[name]["no_effort_nash"] == (r[0] / 2 >= r[1] / 2 - 1)
        assert flags[name]["full_effort_nash"] == (r[2] / 2 - 1 >= r[1] / 2)


def test_example_parameter_ranges():
    with pytest.raises(ParameterError):
        make_example1(F(1, 4), F(1, 4), F(1, 2))
    with pytest.raises(ParameterError):
        make_example1(F(1, 4), F(1, 8), 0)
    with pytest.raises(ParameterError):
        make_example2(F(1, 5))
    with pytest.raises(ParameterError):
        materialize("nope", {})


def test_example1_silent_signal():
    game, mon, mon_p = make_example1(F(1, 4), F(1, 8), F(1, 3))
    assert mon_p.law[0][0][0] == (F(7, 24), F(1, 24), F(2, 3))
    assert validate_game(game, [mon, mon_p]) == []


def test_materialize_defaults_and_overrides():
    game, mons = materialize("example2", {})
    assert set(mons) == {"Pi", "PiPrime"} and game.states == ("s1", "s2")
    assert mons["PiPrime"].law[0][0][1] == (F(1, 2), F(1, 2))
    _, mons = materialize("example2", {"eps": "1/12"})
    assert mons["PiPrime"].law[0][0][1] == (F(7, 12), F(5, 12))
    _, mons = materialize("pd", {"eta_p": "1/8"})
    assert set(mons) == {"Perfect", "Pi", "PiPrime"}
