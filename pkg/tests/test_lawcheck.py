import random
from fractions import Fraction

import pytest

from qtrace import lawcheck
from qtrace.bundled import load_model
from qtrace.models import Dfa, validate
from qtrace.solvers import solve_reach_prob
from qtrace.products import product_mc_dfa

F = Fraction


@pytest.fixture(scope="module")
def robot():
    return load_model("robot-mc.json")


@pytest.fixture(scope="module")
def monitor():
    return load_model("safe-recharge-dfa.json")


def test_fixture_step_equality(robot, monitor):
    res = lawcheck.check_step_equality("mc-dfa", robot, monitor, 6)
    assert res.passed, res.counterexample


def test_all_rejecting_requirement_gives_zeroes(robot):
    dead = Dfa(
        states=("z",),
        alphabet=robot.alphabet,
        delta={"z": {a: ("z", False) for a in robot.alphabet}},
        initial="z",
    )
    res = lawcheck.check_step_equality("mc-dfa", robot, dead, 5)
    assert res.passed
    rep = solve_reach_prob(product_mc_dfa(robot, dead, restrict=False))
    assert all(v == 0 for v in rep.values.values())


@pytest.mark.parametrize("pairing", lawcheck.PAIRINGS)
def test_step_equality_random_smoke(pairing):
    res = lawcheck.run_step_equality_batch(pairing, instances=8, kmax=7, seed=123)
    assert res.passed, res.counterexample


@pytest.mark.parametrize("pairing", lawcheck.DIAGRAM_PAIRINGS)
def test_diagram_random_smoke(pairing):
    res = lawcheck.check_diagram(pairing, samples=60, seed=5)
    assert res.passed, res.counterexample


def test_diagram_refuses_never_terminating_pairing():
    with pytest.raises(ValueError, match="weaker criterion"):
        lawcheck.check_diagram("ntmc-dfa", 10, 0)


@pytest.mark.parametrize("name", sorted(lawcheck.MUTATIONS))
def test_mutations_are_caught_on_fixture(name, robot, monitor):
    res = lawcheck.check_step_equality(
        "mc-dfa", robot, monitor, 4, product_fn=lawcheck.MUTATIONS[name]
    )
    assert not res.passed
    assert res.counterexample["depth"] <= 4


def test_cost_bounded_smoke():
    rng = random.Random(21)
    for _ in range(4):
        c = lawcheck.random_cost_mc(rng, weight_bound=rng.randint(1, 3))
        res = lawcheck.check_cost_bounded(c, budget=rng.randint(1, 5), kmax=6)
        assert res.passed, res.counterexample


def test_cost_induced_smoke():
    rng = random.Random(22)
    for _ in range(4):
        res = lawcheck.check_cost_induced(
            lawcheck.random_mc(rng), lawcheck.random_rm(rng), budget=rng.randint(2, 5), kmax=6
        )
        assert res.passed, res.counterexample


def test_translation_fixture_and_random(robot, monitor):
    assert lawcheck.check_translation(robot, monitor).passed
    rng = random.Random(23)
    for _ in range(5):
        res = lawcheck.check_translation(lawcheck.random_mc(rng), lawcheck.random_dfa(rng))
        assert res.passed, res.counterexample


def test_translation_with_rejecting_requirement_is_zero_on_both_sides(robot):
    dead = Dfa(
        states=("z",),
        alphabet=robot.alphabet,
        delta={"z": {a: ("z", False) for a in robot.alphabet}},
        initial="z",
    )
    assert lawcheck.check_translation(robot, dead).passed
    rep = solve_reach_prob(product_mc_dfa(robot, dead, restrict=False))
    assert all(v == 0 for v in rep.values.values())


def test_step_equality_on_compiled_reactive_fixture():
    from qtrace.bundled import fixture_text, load_model
    from qtrace.programs import compile_probabilistic, parse_program

    chain = compile_probabilistic(
        parse_program(fixture_text("patrol.qtp")), "reactive"
    ).model
    monitor = load_model("reach-recharge-dfa.json")
    res = lawcheck.check_step_equality("ntmc-dfa", chain, monitor, 6)
    assert res.passed, res.counterexample


def test_random_models_are_valid():
    rng = random.Random(55)
    for _ in range(10):
        for pairing in lawcheck.PAIRINGS:
            system, requirement = lawcheck.random_instance(pairing, rng)
            assert validate(system) == []
            assert validate(requirement) == []


def test_batches_are_seed_deterministic():
    a = lawcheck.run_step_equality_batch("mc-dfa", instances=5, kmax=5, seed=99)
    b = lawcheck.run_step_equality_batch("mc-dfa", instances=5, kmax=5, seed=99)
    assert a == b
    c = lawcheck.check_diagram("wts-nfa", samples=40, seed=3)
    d = lawcheck.check_diagram("wts-nfa", samples=40, seed=3)
    assert c == d


def test_check_result_serializes():
    res = lawcheck.check_step_equality(
        "mc-dfa",
        load_model("robot-mc.json"),
        load_model("safe-recharge-dfa.json"),
        3,
    )
    doc = res.to_json()
    assert doc["passed"] is True
    assert doc["name"] == "step-equality[mc-dfa]"
