from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtrace.domains import (
    INF,
    PROB,
    PROB_REWARD,
    TROPICAL,
    ConfigError,
    bottom_vector,
    change,
    kleene_iterate,
    kleene_lfp,
    leq,
    rational,
    rational_str,
)

rationals = st.fractions(max_denominator=1000)


def test_bottom_vectors():
    assert bottom_vector({"s0", "s1"}, PROB) == {"s0": 0, "s1": 0}
    assert bottom_vector({"a"}, TROPICAL) == {"a": INF}
    assert bottom_vector({"a"}, PROB_REWARD) == {"a": (0, 0)}


def test_bottom_vector_rejects_unknown_domain():
    with pytest.raises(ConfigError):
        bottom_vector({"a"}, "lexicographic")
    with pytest.raises(ConfigError):
        bottom_vector(set(), PROB)


def test_rational_parse_and_render():
    assert rational("4/5") == Fraction(4, 5)
    assert rational("3") == 3
    assert rational_str(Fraction(4, 25)) == "4/25"
    assert rational_str(Fraction(1)) == "1/1"
    with pytest.raises(ConfigError):
        rational("4/0")
    with pytest.raises(ConfigError):
        rational("pi")


def test_tropical_order_is_reversed():
    assert leq(TROPICAL, INF, 3)
    assert leq(TROPICAL, 7, 3)
    assert not leq(TROPICAL, 3, 7)
    assert change(TROPICAL, INF, INF) == 0
    assert change(TROPICAL, INF, 5) == INF


def test_kleene_iterate_identity_and_steps():
    v = {"a": Fraction(1, 3)}
    assert kleene_iterate(lambda u: u, v, 17) == v
    assert kleene_iterate(lambda u: {"a": u["a"] + 1}, {"a": Fraction(0)}, 0) == {"a": 0}
    assert kleene_iterate(lambda u: {"a": u["a"] + 1}, {"a": Fraction(0)}, 4) == {"a": 4}


def test_kleene_lfp_stabilizes_exactly():
    def phi(u):
        return {"a": min(u["a"] + 1, 3)}

    res = kleene_lfp(phi, {"a": 0})
    assert res.values == {"a": 3}
    assert res.converged


def test_kleene_lfp_reports_max_iter():
    # probability-1 self loop with no way out: bottom is already the fixed
    # point semantically, but the iterates never repeat literally
    res = kleene_lfp(lambda u: {"a": u["a"] + 1}, {"a": 0}, max_iter=25)
    assert not res.converged
    assert res.iterations == 25


def test_kleene_lfp_epsilon_mode():
    def phi(u):
        return {"a": u["a"] / 2 + Fraction(1, 2)}

    res = kleene_lfp(phi, {"a": Fraction(0)}, epsilon=Fraction(1, 1000), domain=PROB)
    assert res.converged
    assert abs(res.values["a"] - 1) < Fraction(1, 500)


@given(rationals, rationals)
def test_rational_arithmetic_is_exact(a, b):
    assert a + b - b == a
    s = a + b
    assert s.denominator > 0
    from math import gcd

    assert gcd(s.numerator, s.denominator) == 1


@given(st.lists(rationals, min_size=1, max_size=6))
def test_prob_reward_order_is_componentwise(values):
    pairs = [(abs(v), abs(v) + 1) for v in values]
    for p in pairs:
        assert leq(PROB_REWARD, p, (p[0] + 1, p[1] + 1))
        assert not leq(PROB_REWARD, (p[0] + 1, p[1]), p)
