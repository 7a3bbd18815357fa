import random
from fractions import Fraction

import pytest

from qtrace.bundled import load_model
from qtrace.lawcheck import random_mc, random_dfa, random_wts, random_wmm
from qtrace.models import (
    ABSORB,
    ACCEPT,
    Dfa,
    LabeledMc,
    MarkovRewardModel,
    ModelError,
    Nfa,
    NonTerminatingMc,
    REJECT,
    WeightedMealy,
    WeightedTs,
    joined,
    validate,
)
from qtrace.products import (
    pair_states,
    product_mc_dfa,
    product_mrm_dfa,
    product_ntmc_dfa,
    product_wts_nfa,
    product_wts_wmm,
)

F = Fraction


@pytest.fixture(scope="module")
def robot():
    return load_model("robot-mc.json")


@pytest.fixture(scope="module")
def monitor():
    return load_model("safe-recharge-dfa.json")


def test_product_fragment_edges(robot, monitor):
    prod = product_mc_dfa(robot, monitor)
    assert prod.trans["x0|y0"]["x1|y0"] == F(4, 5)
    assert prod.trans["x1|y0"]["x3|y2"] == F(1)
    assert prod.trans["x3|y2"][REJECT] == F(1)
    assert prod.trans["x3|y0"][ACCEPT] == F(1)


def test_product_rows_sum_to_one(robot, monitor):
    for restrict in (True, False):
        prod = product_mc_dfa(robot, monitor, restrict=restrict)
        assert validate(prod) == []
        for s in pair_states(prod):
            assert sum(prod.trans[s].values()) == 1


def test_all_rejecting_requirement(robot):
    dead = Dfa(
        states=("z",),
        alphabet=robot.alphabet,
        delta={"z": {a: ("z", False) for a in robot.alphabet}},
        initial="z",
    )
    prod = product_mc_dfa(robot, dead, restrict=False)
    for s in pair_states(prod):
        assert ACCEPT not in prod.trans[s]


def test_alphabet_mismatch_rejected(robot):
    other = Dfa(("z",), ("x",), {"z": {"x": ("z", False)}}, "z")
    with pytest.raises(ModelError):
        product_mc_dfa(robot, other)


def test_restriction_only_drops_unreachable(robot, monitor):
    full = product_mc_dfa(robot, monitor, restrict=False)
    small = product_mc_dfa(robot, monitor, restrict=True)
    assert set(small.states) <= set(full.states)
    assert small.initial == full.initial
    for s in pair_states(small):
        assert small.trans[s] == full.trans[s]


def test_reward_product_carries_step_rewards(robot, monitor):
    mrm = MarkovRewardModel(
        robot.states,
        robot.alphabet,
        robot.label,
        {x: i for i, x in enumerate(robot.states)},
        robot.trans,
        robot.initial,
    )
    prod = product_mrm_dfa(mrm, monitor, restrict=False)
    assert validate(prod) == []
    for x in robot.states:
        for y in monitor.states:
            assert prod.stepreward[joined(x, y)] == mrm.reward[x]
    plain = product_mc_dfa(robot, monitor, restrict=False)
    assert prod.trans == plain.trans


def test_absorbing_product_acceptance_is_total(monitor):
    c = NonTerminatingMc(
        states=("s",),
        alphabet=monitor.alphabet,
        label={"s": "recharge"},
        trans={"s": {"s": F(1)}},
        initial="s",
    )
    prod = product_ntmc_dfa(c, monitor, restrict=False)
    assert validate(prod) == []
    # an accepting step absorbs the whole unit mass, whatever the row was
    assert prod.trans["s|y0"] == {ABSORB: F(1)}
    # a non-accepting step carries the distribution and advances the monitor
    assert prod.trans["s|y2"] == {joined("s", "y3"): F(1)}


def test_wts_nfa_product_single_transition():
    wts = WeightedTs(("x",), ("P", "B", "T"), {"x": (("*", "T", 3),)}, "x")
    nfa = load_model("train-arrival-nfa.json")
    prod = product_wts_nfa(wts, nfa, restrict=False)
    assert set(prod.trans["x|y0"]) == {(ACCEPT, 3), (REJECT, 3)}
    assert prod.trans["x|y1"] == ()


def test_wts_product_cross_cardinality():
    wts = WeightedTs(
        ("x", "z"), ("a",), {"x": (("z", "a", 1), ("*", "a", 2)), "z": ()}, "x"
    )
    nfa = Nfa(
        ("y",),
        ("a",),
        {"y": {"a": (("y", False), ("y", True))}},
        "y",
    )
    prod = product_wts_nfa(wts, nfa, restrict=False)
    # 2 system transitions x 2 requirement edges, deduplicated as a set
    assert set(prod.trans["x|y"]) == {
        (joined("z", "y"), 1),
        (ACCEPT, 2),
        (REJECT, 2),
    }


def test_zero_weight_wmm_collapses_to_nfa_product():
    rng = random.Random(12)
    for _ in range(6):
        wts = random_wts(rng, max_states=4)
        wmm = random_wmm(rng, max_states=3)
        zero = WeightedMealy(
            wmm.states,
            wmm.alphabet,
            {
                y: {a: tuple((t, f, 0) for t, f, _ in row) for a, row in table.items()}
                for y, table in wmm.delta.items()
            },
            wmm.initial,
        )
        flags = Nfa(
            wmm.states,
            wmm.alphabet,
            {
                y: {a: tuple((t, f) for t, f, _ in row) for a, row in table.items()}
                for y, table in wmm.delta.items()
            },
            wmm.initial,
        )
        via_wmm = product_wts_wmm(wts, zero, restrict=False)
        via_nfa = product_wts_nfa(wts, flags, restrict=False)
        assert via_wmm == via_nfa


def _rename_mc(mc: LabeledMc, tag: str) -> LabeledMc:
    r = lambda s: f"{tag}{s}"
    return LabeledMc(
        states=tuple(r(s) for s in mc.states),
        alphabet=mc.alphabet,
        label={r(s): a for s, a in mc.label.items()},
        trans={
            r(s): {(succ if succ == "*" else r(succ)): p for succ, p in row.items()}
            for s, row in mc.trans.items()
        },
        initial=r(mc.initial),
    )


def _rename_dfa(d: Dfa, tag: str) -> Dfa:
    r = lambda s: f"{tag}{s}"
    return Dfa(
        states=tuple(r(s) for s in d.states),
        alphabet=d.alphabet,
        delta={r(y): {a: (r(t), f) for a, (t, f) in row.items()} for y, row in d.delta.items()},
        initial=r(d.initial),
    )


def test_renaming_commutes_with_construction():
    # construct-then-rename equals rename-then-construct
    rng = random.Random(31)
    for _ in range(5):
        mc = random_mc(rng, max_states=4)
        d = random_dfa(rng, max_states=3)
        before = product_mc_dfa(_rename_mc(mc, "L_"), _rename_dfa(d, "R_"), restrict=False)
        after = product_mc_dfa(mc, d, restrict=False)
        mapping = {
            joined(x, y): joined(f"L_{x}", f"R_{y}") for x in mc.states for y in d.states
        }
        mapping.update({ACCEPT: ACCEPT, REJECT: REJECT})
        renamed_trans = {
            mapping[s]: {mapping[t]: p for t, p in row.items()}
            for s, row in after.trans.items()
        }
        assert renamed_trans == before.trans
        assert mapping[after.initial] == before.initial


def test_join_collision_detected():
    mc = LabeledMc(
        states=("a", "a|b"),
        alphabet=("x",),
        label={"a": "x", "a|b": "x"},
        trans={"a": {"*": F(1)}, "a|b": {"*": F(1)}},
        initial="a",
    )
    d = Dfa(
        states=("b|c", "c"),
        alphabet=("x",),
        delta={"b|c": {"x": ("c", False)}, "c": {"x": ("c", False)}},
        initial="b|c",
    )
    with pytest.raises(ModelError):
        product_mc_dfa(mc, d)
