import json
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from wgarbling.apps import materialize
from wgarbling.gamefile import GameDocument, GameFileError, dumps, from_dict, loads, to_dict


def doc_for(name, params=None):
    game, mons = materialize(name, params or {})
    return GameDocument(game, mons, {"name": name, "params": params or {}})


@pytest.mark.parametrize("name", ["example1", "example2", "pd"])
def test_round_trip_is_byte_identical(name):
    text = dumps(doc_for(name))
    back = loads(text)
    assert dumps(back) == text
    assert back.game == materialize(name, {})[0]


@given(st.fractions(min_value=0, max_value=F(1, 6), max_denominator=50))
def test_round_trip_preserves_rationals(eps):
    doc = doc_for("example2", {"eps": eps})
    back = loads(dumps(doc))
    assert back.monitors["PiPrime"] == doc.monitors["PiPrime"]
    assert back.generator["params"]["eps"] == eps


def test_bare_integers_accepted():
    data = to_dict(doc_for("pd"))
    data["payoffs"] = [[[1, 1], ["-1/4", "3/2"], ["3/2", "-1/4"], [0, 0]]]
    assert loads(json.dumps(data)).game.payoff[0][1] == (F(-1, 4), F(3, 2))


def bad(mutate):
    data = to_dict(doc_for("example2"))
    mutate(data)
    with pytest.raises(GameFileError) as exc:
        from_dict(data)
    return str(exc.value)


def test_float_rejected_with_path():
    msg = bad(lambda d: d["transition"][0][1].__setitem__(0, 0.5))
    assert msg.startswith("transition[0][1][0]")


def test_non_stochastic_row_reported():
    def mutate(d):
        d["monitors"]["Pi"]["law"][1][2][0] = ["1/2", "1/3"]
    assert bad(mutate) == "monitors.Pi: signal row (t=s1, s=s2, a=D,C) sums to 5/6"


def test_structural_errors():
    assert bad(lambda d: d.pop("states")) == "states: missing field"
    assert bad(lambda d: d.__setitem__("extra", 1)) == "extra: unknown field"
    assert "expected 2" in bad(lambda d: d.__setitem__("payoffs", [["1"]]))
    assert "nesting" in bad(lambda d: d.__setitem__("payoffs", ["1", "2"]))
    assert "signals" in bad(lambda d: d["monitors"].__setitem__("X", {"law": []}))
    assert bad(lambda d: d.__setitem__("generator", {"name": "x"})).startswith("generator")


def test_json_syntax_error_location():
    with pytest.raises(GameFileError, match=r"line 2, column \d+"):
        loads('{\n  "states": [,]\n}')


def test_unknown_monitor_names_known_ones():
    with pytest.raises(GameFileError, match="known: Pi, PiPrime"):
        doc_for("example2").monitor("Q")
