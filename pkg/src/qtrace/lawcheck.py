"""Executable correctness checks for the product constructions.

Two families of checks are provided:

* ``check_step_equality`` -- for every depth k up to a bound and every
  joint state, the k-th iterate of the product's value update must equal
  the query evaluated on the depth-k direct semantics of the two
  machines.  This is exact (rational / min-plus) equality and is the
  repository's core guarantee.

* ``check_diagram`` -- the one-step commutation property behind that
  equality, tested on randomly sampled semantic values: folding the two
  sides first and then querying must coincide with pairing first and then
  folding the product update.  The never-terminating pairing is excluded
  (its property only holds on iterates, which step equality covers).

Composite checks (``check_cost_bounded``, ``check_cost_induced``,
``check_translation``) validate derived constructions end to end, and a
small catalogue of deliberately broken pairing rules (``MUTATIONS``)
demonstrates that step equality actually has teeth.

All randomness is drawn from explicitly seeded generators so every
failure is reproducible from its seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from heapq import heappop, heappush
from typing import Callable

from . import oracle
from .domains import INF, ONE, ZERO, bottom_vector
from .models import (
    ACCEPT,
    Dfa,
    LabeledMc,
    MarkovRewardModel,
    Nfa,
    NonTerminatingMc,
    REJECT,
    RewardMachine,
    TARGET,
    WeightedMealy,
    WeightedTs,
    joined,
    make_cost_bound_dfa,
    product_rm_costdfa,
    translate_to_nonterminating,
)
from .products import (
    ProductWts,
    mc_dfa_row,
    mrm_dfa_row,
    product_mc_dfa,
    product_mrm_dfa,
    product_ntmc_dfa,
    product_wts_nfa,
    product_wts_wmm,
    wts_nfa_row,
    wts_wmm_row,
)
from .solvers import (
    min_cost_step,
    product_domain,
    product_transformer,
    reach_value_step,
    reward_value_step,
    solve_reach_prob,
)

PAIRINGS = ("mc-dfa", "mrm-dfa", "mc-costdfa", "ntmc-dfa", "wts-nfa", "wts-wmm")

#: Pairings with a full one-step commutation property; the never-terminating
#: pairing satisfies only the iterate-level property.
DIAGRAM_PAIRINGS = ("mc-dfa", "mrm-dfa", "mc-costdfa", "wts-nfa", "wts-wmm")


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one correctness check; failures carry a counterexample."""

    name: str
    passed: bool
    counterexample: dict | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        doc = {"name": self.name, "passed": self.passed, "details": self.details}
        if self.counterexample is not None:
            doc["counterexample"] = self.counterexample
        return doc


def _show(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, tuple):
        return "(" + ", ".join(_show(v) for v in value) + ")"
    if value == INF:
        return "inf"
    return str(value)


def _fail(name: str, *, x, y, k, lhs, rhs, details) -> CheckResult:
    return CheckResult(
        name,
        False,
        {
            "system_state": x,
            "requirement_state": y,
            "depth": k,
            "product_value": _show(lhs),
            "direct_value": _show(rhs),
        },
        details,
    )


# ---------------------------------------------------------------------------
# step-indexed equality

def check_step_equality(
    pairing: str,
    system,
    requirement,
    kmax: int,
    product_fn: Callable | None = None,
    name: str | None = None,
) -> CheckResult:
    """Compare product iterates with direct-semantics queries, depth by depth.

    For every k <= kmax and every pair (x, y), the k-th iterate of the
    product's value update at (x, y) must equal the query applied to the
    depth-k semantics of the system at x and of the requirement at y.
    The first mismatch is reported as a counterexample.
    """
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown pairing {pairing!r}")
    name = name or f"step-equality[{pairing}]"
    details = {"pairing": pairing, "kmax": kmax}

    if pairing in ("mc-dfa", "mc-costdfa"):
        build = product_fn or product_mc_dfa
        product = build(system, requirement, restrict=False)
        sys_levels = oracle.mc_semantics_levels(system, kmax)
        views = {
            (y, k): oracle.DfaLanguage(requirement, y, k)
            for y in requirement.states
            for k in range(kmax + 1)
        }
        direct = lambda x, y, k: oracle.query_prob(sys_levels[k][x], views[(y, k)])
    elif pairing == "mrm-dfa":
        build = product_fn or product_mrm_dfa
        product = build(system, requirement, restrict=False)
        sys_levels = oracle.mrm_semantics_levels(system, kmax)
        views = {
            (y, k): oracle.DfaLanguage(requirement, y, k)
            for y in requirement.states
            for k in range(kmax + 1)
        }
        direct = lambda x, y, k: oracle.query_reward(sys_levels[k][x], views[(y, k)])
    elif pairing == "ntmc-dfa":
        build = product_fn or product_ntmc_dfa
        product = build(system, requirement, restrict=False)
        marginals = oracle.ntmc_marginal_levels(system, kmax)
        minimal: dict[tuple, dict[str, bool]] = {}

        def minimal_flags(w) -> dict[str, bool]:
            got = minimal.get(w)
            if got is None:
                got = {
                    y: oracle.prefix_minimal_accept(requirement, y, w)
                    for y in requirement.states
                }
                minimal[w] = got
            return got

        # query value at depth k = value at k-1 plus the mass of the
        # prefix-minimal accepted words of length exactly k
        acc: dict[tuple[str, str], Fraction] = {
            (x, y): ZERO for x in system.states for y in requirement.states
        }
        per_depth: list[dict[tuple[str, str], Fraction]] = [dict(acc)]
        for k in range(1, kmax + 1):
            for x in system.states:
                level = marginals[k][x]
                for w, p in level.items():
                    flags = minimal_flags(w)
                    for y in requirement.states:
                        if flags[y]:
                            acc[(x, y)] += p
            per_depth.append(dict(acc))
        direct = lambda x, y, k: per_depth[k][(x, y)]
    elif pairing == "wts-nfa":
        build = product_fn or product_wts_nfa
        product = build(system, requirement, restrict=False)
        sys_levels = oracle.wts_semantics_levels(system, kmax)
        views = {
            (y, k): oracle.NfaLanguage(requirement, y, k)
            for y in requirement.states
            for k in range(kmax + 1)
        }
        direct = lambda x, y, k: oracle.query_tropical(sys_levels[k][x], views[(y, k)])
    elif pairing == "wts-wmm":
        build = product_fn or product_wts_wmm
        product = build(system, requirement, restrict=False)
        sys_levels = oracle.wts_semantics_levels(system, kmax)
        # the query only needs the cheapest accepting run per trace, so the
        # requirement side is evaluated lazily instead of materialized
        weight_memo: dict[tuple[str, tuple], object] = {}

        def cheapest(y: str, w) -> object:
            got = weight_memo.get((y, w))
            if got is None:
                got = oracle.wmm_min_weight(requirement, y, w)
                weight_memo[(y, w)] = got
            return got

        def direct(x, y, k):
            best = INF
            for w, m in sys_levels[k][x]:
                n = cheapest(y, w)
                if m + n < best:
                    best = m + n
            return best

    phi = product_transformer(product)
    values = bottom_vector(list(product.trans), product_domain(product))
    for k in range(kmax + 1):
        if k > 0:
            values = phi(values)
        for x in system.states:
            for y in requirement.states:
                lhs = values[joined(x, y)]
                rhs = direct(x, y, k)
                if lhs != rhs:
                    return _fail(name, x=x, y=y, k=k, lhs=lhs, rhs=rhs, details=details)
    return CheckResult(name, True, None, details)


# ---------------------------------------------------------------------------
# sampled one-step commutation

def _rand_den(rng: random.Random) -> int:
    return rng.choice((2, 3, 4, 5, 8, 16))


def _rand_unit_split(rng: random.Random, parts: int) -> list[Fraction]:
    """Positive rationals with a common small denominator summing to 1."""
    den = max(_rand_den(rng), parts)
    cuts = sorted(rng.sample(range(1, den), parts - 1)) if parts > 1 else []
    nums = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    return [Fraction(n, den) for n in nums]


def _rand_word(rng: random.Random, alphabet, max_len=3) -> tuple[str, ...]:
    return tuple(rng.choice(alphabet) for _ in range(rng.randint(1, max_len)))


def _rand_lang(rng: random.Random, alphabet) -> set:
    return {_rand_word(rng, alphabet) for _ in range(rng.randint(0, 4))}


def _rand_trace_dist(rng: random.Random, alphabet) -> dict:
    words = list({_rand_word(rng, alphabet) for _ in range(rng.randint(0, 3))})
    if not words:
        return {}
    masses = _rand_unit_split(rng, len(words) + 1)[:-1]  # keep total below 1
    return {w: p for w, p in zip(words, masses) if p > 0}


def _rand_trace_reward_dist(rng: random.Random, alphabet) -> dict:
    return {
        (w, rng.randint(0, 6)): p for w, p in _rand_trace_dist(rng, alphabet).items()
    }


def _rand_weight_set(rng: random.Random, alphabet) -> set:
    return {
        (_rand_word(rng, alphabet), rng.randint(0, 5))
        for _ in range(rng.randint(0, 4))
    }


def _rand_value_dist(rng: random.Random, values: list) -> tuple[list, Fraction]:
    """Distribution over up to three semantic values plus a halting mass."""
    count = rng.randint(0, min(3, len(values)))
    masses = _rand_unit_split(rng, count + 1)
    entries = [(values[i], masses[i]) for i in range(count)]
    return entries, masses[-1]


def check_diagram(pairing: str, samples: int, seed: int) -> CheckResult:
    """Sampled one-step commutation check for a pairing's product rule.

    Each sample draws finite semantic values, folds them through the two
    composite paths and compares the results exactly.  Degenerate samples
    (pure halting mass, empty requirement rows) are always included.
    """
    if pairing == "ntmc-dfa":
        raise ValueError(
            "ntmc-dfa satisfies the weaker criterion only; its one-step diagram "
            "is not checked -- use check_step_equality instead"
        )
    if pairing not in DIAGRAM_PAIRINGS:
        raise ValueError(f"unknown pairing {pairing!r}")
    rng = random.Random(seed)
    alphabet = ("1", "2", "3") if pairing == "mc-costdfa" else ("a", "b", "c")
    details = {"pairing": pairing, "samples": samples, "seed": seed}
    name = f"diagram[{pairing}]"

    for i in range(samples):
        degenerate = i < 2  # first samples: halt-only mass / empty rows
        if pairing in ("mc-dfa", "mc-costdfa"):
            dists = [_rand_trace_dist(rng, alphabet) for _ in range(3)]
            entries, halt = ([], ONE) if degenerate else _rand_value_dist(rng, dists)
            symbol = rng.choice(alphabet)
            row = {
                a: ((set() if degenerate else _rand_lang(rng, alphabet)), rng.random() < 0.25)
                for a in alphabet
            }
            lhs = oracle.query_prob(
                oracle.mc_trace_step(entries, halt, symbol),
                oracle.dfa_lang_step(row),
            )
            pairs, acc, rej = mc_dfa_row(entries, halt, symbol, row)
            mapped = [(oracle.query_prob(nu, lang), p) for (nu, lang), p in pairs]
            rhs = reach_value_step(mapped, acc)
        elif pairing == "mrm-dfa":
            dists = [_rand_trace_reward_dist(rng, alphabet) for _ in range(3)]
            entries, halt = ([], ONE) if degenerate else _rand_value_dist(rng, dists)
            symbol = rng.choice(alphabet)
            step_reward = rng.randint(0, 5)
            row = {
                a: ((set() if degenerate else _rand_lang(rng, alphabet)), rng.random() < 0.25)
                for a in alphabet
            }
            lhs = oracle.query_reward(
                oracle.mrm_trace_step(entries, halt, step_reward, symbol),
                oracle.dfa_lang_step(row),
            )
            pairs, acc, rej, reward = mrm_dfa_row(entries, halt, step_reward, symbol, row)
            mapped = [(oracle.query_reward(nu, lang), p) for (nu, lang), p in pairs]
            rhs = reward_value_step(mapped, acc, reward)
        elif pairing == "wts-nfa":
            sets = [_rand_weight_set(rng, alphabet) for _ in range(3)]
            transitions = []
            if not degenerate:
                for _ in range(rng.randint(0, 4)):
                    succ = None if rng.random() < 0.4 else rng.choice(sets)
                    transitions.append((succ, rng.choice(alphabet), rng.randint(0, 5)))
            row = {
                a: (
                    []
                    if degenerate
                    else [
                        (_rand_lang(rng, alphabet), rng.random() < 0.25)
                        for _ in range(rng.randint(0, 2))
                    ]
                )
                for a in alphabet
            }
            lhs = oracle.query_tropical(
                oracle.wts_trace_step(transitions),
                oracle.nfa_lang_step(row),
            )
            entries = wts_nfa_row(transitions, lambda a: row[a])
            accepts = [m for tgt, m in entries if tgt == ACCEPT]
            succ = [
                (oracle.query_tropical(tgt[0], tgt[1]), m)
                for tgt, m in entries
                if isinstance(tgt, tuple)
            ]
            rhs = min_cost_step(succ, accepts)
        else:  # wts-wmm
            sets = [_rand_weight_set(rng, alphabet) for _ in range(3)]
            transitions = []
            if not degenerate:
                for _ in range(rng.randint(0, 4)):
                    succ = None if rng.random() < 0.4 else rng.choice(sets)
                    transitions.append((succ, rng.choice(alphabet), rng.randint(0, 5)))
            row = {
                a: (
                    []
                    if degenerate
                    else [
                        (
                            _rand_weight_set(rng, alphabet),
                            rng.random() < 0.25,
                            rng.randint(0, 5),
                        )
                        for _ in range(rng.randint(0, 2))
                    ]
                )
                for a in alphabet
            }
            lhs = oracle.query_wmm(
                oracle.wts_trace_step(transitions),
                oracle.wmm_trace_step(row),
            )
            entries = wts_wmm_row(transitions, lambda a: row[a])
            accepts = [m for tgt, m in entries if tgt == ACCEPT]
            succ = [
                (oracle.query_wmm(tgt[0], tgt[1]), m)
                for tgt, m in entries
                if isinstance(tgt, tuple)
            ]
            rhs = min_cost_step(succ, accepts)

        if lhs != rhs:
            return CheckResult(
                name,
                False,
                {"sample": i, "lhs": _show(lhs), "rhs": _show(rhs)},
                details,
            )
    return CheckResult(name, True, None, details)


# ---------------------------------------------------------------------------
# composite constructions

def check_cost_bounded(c: LabeledMc, budget: int, kmax: int) -> CheckResult:
    """Bounded-budget acceptance: product pipeline vs direct weight sums.

    The direct side never touches the budget automaton: it sums the mass
    of the weight words whose total stays below the budget.  Checked at
    every depth up to kmax and, because weights are at least 1, the exact
    solve must agree with the direct value at depth max(kmax, budget).
    """
    weight_bound = max(int(a) for a in c.alphabet)
    cd = make_cost_bound_dfa(budget, weight_bound)
    product = product_mc_dfa(c, cd, restrict=False)
    phi = product_transformer(product)
    depth = max(kmax, budget)
    sys_levels = oracle.mc_semantics_levels(c, depth)
    details = {"budget": budget, "kmax": kmax}
    name = f"cost-bounded[N={budget}]"

    values = {s: ZERO for s in product.trans}
    for k in range(depth + 1):
        if k > 0:
            values = phi(values)
        for x in c.states:
            lhs = values[joined(x, str(budget))]
            rhs = oracle.query_cost_bounded(sys_levels[k][x], budget)
            if lhs != rhs:
                return _fail(name, x=x, y=str(budget), k=k, lhs=lhs, rhs=rhs, details=details)
    exact = solve_reach_prob(product).values
    for x in c.states:
        lhs = exact[joined(x, str(budget))]
        rhs = oracle.query_cost_bounded(sys_levels[depth][x], budget)
        if lhs != rhs:
            return _fail(name, x=x, y=str(budget), k="exact", lhs=lhs, rhs=rhs, details=details)
    return CheckResult(name, True, None, details)


def check_cost_induced(c: LabeledMc, rm: RewardMachine, budget: int, kmax: int) -> CheckResult:
    """Requirement-induced costs: composed product vs transducer weight sums.

    The requirement is the composition of the reward machine with the
    budget automaton; the direct side runs the transducer over each trace
    and sums its weights.
    """
    cd = make_cost_bound_dfa(budget, rm.bound)
    composed = product_rm_costdfa(rm, cd)
    product = product_mc_dfa(c, composed, restrict=False)
    phi = product_transformer(product)
    depth = max(kmax, budget)
    sys_levels = oracle.mc_semantics_levels(c, depth)
    details = {"budget": budget, "kmax": kmax, "bound": rm.bound}
    name = f"cost-induced[N={budget}]"

    values = {s: ZERO for s in product.trans}
    for k in range(depth + 1):
        if k > 0:
            values = phi(values)
        for x in c.states:
            for y in rm.states:
                lhs = values[joined(x, y, str(budget))]
                rhs = oracle.query_cost_induced(
                    sys_levels[k][x], lambda w, _y=y: oracle.rm_weights(rm, _y, w), budget
                )
                if lhs != rhs:
                    return _fail(name, x=x, y=y, k=k, lhs=lhs, rhs=rhs, details=details)
    exact = solve_reach_prob(product).values
    for x in c.states:
        for y in rm.states:
            lhs = exact[joined(x, y, str(budget))]
            rhs = oracle.query_cost_induced(
                sys_levels[depth][x], lambda w, _y=y: oracle.rm_weights(rm, _y, w), budget
            )
            if lhs != rhs:
                return _fail(name, x=x, y=y, k="exact", lhs=lhs, rhs=rhs, details=details)
    return CheckResult(name, True, None, details)


def check_translation(c: LabeledMc, d: Dfa) -> CheckResult:
    """Terminating pipeline vs its never-terminating translation.

    Both sides are solved exactly; the values must agree at every pair of
    corresponding states, for either choice of the carried flag.
    """
    direct = solve_reach_prob(product_mc_dfa(c, d, restrict=False)).values
    chain, monitor = translate_to_nonterminating(c, d)
    translated = solve_reach_prob(product_ntmc_dfa(chain, monitor, restrict=False)).values
    name = "translation"
    for x in c.states:
        for y in d.states:
            lhs = direct[joined(x, y)]
            for tag in ("acc", "rej"):
                rhs = translated[joined(x, joined(y, tag))]
                if lhs != rhs:
                    return _fail(
                        name, x=x, y=f"{y}/{tag}", k="exact", lhs=lhs, rhs=rhs, details={}
                    )
    return CheckResult(name, True, None, {})


# ---------------------------------------------------------------------------
# independent shortest-path oracle

def dijkstra_to_accept(m: ProductWts) -> dict[str, int | float]:
    """Least weight to the accepting sink, by Dijkstra on the reversed graph.

    Deliberately independent of the min-cost iteration in the solver.
    """
    incoming: dict[str, list[tuple[str, int]]] = {}
    for s, entries in m.trans.items():
        for t, w in entries:
            incoming.setdefault(t, []).append((s, w))
    dist: dict[str, int | float] = {s: INF for s in m.trans}
    heap: list[tuple[int, str]] = []
    for s, w in incoming.get(ACCEPT, []):
        if w < dist[s]:
            dist[s] = w
            heappush(heap, (w, s))
    while heap:
        dw, t = heappop(heap)
        if dw > dist[t]:
            continue
        for s, w in incoming.get(t, []):
            cand = dw + w
            if cand < dist[s]:
                dist[s] = cand
                heappush(heap, (cand, s))
    return dist


# ---------------------------------------------------------------------------
# mutation catalogue: single-edit variants of the mc-dfa pairing rule

def _product_mc_dfa_with(row_fn):
    def build(c: LabeledMc, d: Dfa, restrict: bool = True):
        from .products import ProductMc, _explore

        back = {joined(x, y): (x, y) for x in c.states for y in d.states}
        rows: dict[str, dict[str, Fraction]] = {}

        def build_row(s: str) -> dict[str, Fraction]:
            x, y = back[s]
            row = c.trans[x]
            succ = [(x2, p) for x2, p in row.items() if x2 != TARGET]
            pairs, acc, rej = row_fn(c, d, y, succ, row.get(TARGET, ZERO), c.label[x])
            out: dict[str, Fraction] = {}
            for (x2, y2), p in pairs:
                key = joined(x2, y2)
                out[key] = out.get(key, ZERO) + p
            if acc:
                out[ACCEPT] = out.get(ACCEPT, ZERO) + acc
            if rej:
                out[REJECT] = out.get(REJECT, ZERO) + rej
            return out

        def row_of(s: str):
            if s not in rows:
                rows[s] = build_row(s)
            return rows[s]

        init = joined(c.initial, d.initial)
        order = _explore(init, row_of, restrict, list(back))
        for s in order:
            row_of(s)
        return ProductMc(
            states=tuple(order) + (ACCEPT, REJECT),
            trans={s: rows[s] for s in order},
            initial=init,
        )

    return build


def _rule_flag_swapped(c, d, y, succ, halt, symbol):
    pairs, acc, rej = mc_dfa_row(succ, halt, symbol, d.delta[y])
    return pairs, rej, acc


def _rule_requirement_frozen(c, d, y, succ, halt, symbol):
    _, flag = d.delta[y][symbol]
    pairs = [((x, y), p) for x, p in succ]  # monitor never advances
    return (pairs, halt, ZERO) if flag else (pairs, ZERO, halt)


def _rule_halt_mass_dropped(c, d, y, succ, halt, symbol):
    pairs, _, _ = mc_dfa_row(succ, halt, symbol, d.delta[y])
    return pairs, ZERO, ZERO


def _rule_symbol_ignored(c, d, y, succ, halt, symbol):
    return mc_dfa_row(succ, halt, c.alphabet[0], d.delta[y])


def _rule_pair_broadcast(c, d, y, succ, halt, symbol):
    _, flag = d.delta[y][symbol]
    pairs = [((x, y2), p) for x, p in succ for y2 in d.states]
    return (pairs, halt, ZERO) if flag else (pairs, ZERO, halt)


#: Single-edit broken variants of the mc-dfa pairing rule, each of which
#: must be caught by check_step_equality on the shipped robot fixture.
MUTATIONS: dict[str, Callable] = {
    "flag-swapped": _product_mc_dfa_with(_rule_flag_swapped),
    "requirement-frozen": _product_mc_dfa_with(_rule_requirement_frozen),
    "halt-mass-dropped": _product_mc_dfa_with(_rule_halt_mass_dropped),
    "symbol-ignored": _product_mc_dfa_with(_rule_symbol_ignored),
    "pair-broadcast": _product_mc_dfa_with(_rule_pair_broadcast),
}


# ---------------------------------------------------------------------------
# seeded random instances

def _rand_row(rng: random.Random, targets: list[str], allow_halt: bool) -> dict[str, Fraction]:
    pool = list(targets)
    support = rng.sample(pool, min(len(pool), rng.randint(1, 2)))
    if allow_halt and (rng.random() < 0.5 or not support):
        support.append(TARGET)
    if len(support) == 1:
        return {support[0]: ONE}
    probs = _rand_unit_split(rng, len(support))
    return {s: p for s, p in zip(support, probs)}


def random_mc(rng: random.Random, alphabet=("a", "b", "c"), max_states: int = 6) -> LabeledMc:
    n = rng.randint(2, max_states)
    states = tuple(f"s{i}" for i in range(n))
    label = {x: rng.choice(alphabet) for x in states}
    trans = {x: _rand_row(rng, list(states), allow_halt=True) for x in states}
    # make sure termination is reachable at all
    trans[states[-1]] = {TARGET: ONE}
    return LabeledMc(states, tuple(alphabet), label, trans, states[0])


def random_mrm(rng: random.Random, alphabet=("a", "b", "c"), max_states: int = 6) -> MarkovRewardModel:
    mc = random_mc(rng, alphabet, max_states)
    reward = {x: rng.randint(0, 5) for x in mc.states}
    return MarkovRewardModel(mc.states, mc.alphabet, mc.label, reward, mc.trans, mc.initial)


def random_ntmc(rng: random.Random, alphabet=("a", "b", "c"), max_states: int = 6) -> NonTerminatingMc:
    n = rng.randint(2, max_states)
    states = tuple(f"s{i}" for i in range(n))
    label = {x: rng.choice(alphabet) for x in states}
    trans = {x: _rand_row(rng, list(states), allow_halt=False) for x in states}
    return NonTerminatingMc(states, tuple(alphabet), label, trans, states[0])


def random_dfa(rng: random.Random, alphabet=("a", "b", "c"), max_states: int = 4) -> Dfa:
    n = rng.randint(2, max_states)
    states = tuple(f"q{i}" for i in range(n))
    delta = {
        y: {a: (rng.choice(states), rng.random() < 0.25) for a in alphabet}
        for y in states
    }
    return Dfa(states, tuple(alphabet), delta, states[0])


def random_nfa(rng: random.Random, alphabet=("a", "b", "c"), max_states: int = 4) -> Nfa:
    n = rng.randint(2, max_states)
    states = tuple(f"q{i}" for i in range(n))
    delta = {}
    for y in states:
        row = {}
        for a in alphabet:
            entries = tuple(
                (rng.choice(states), rng.random() < 0.25)
                for _ in range(rng.randint(0, 2))
            )
            if entries:
                row[a] = entries
        delta[y] = row
    return Nfa(states, tuple(alphabet), delta, states[0])


def random_wts(rng: random.Random, alphabet=("a", "b", "c"), max_states: int = 6) -> WeightedTs:
    n = rng.randint(2, max_states)
    states = tuple(f"s{i}" for i in range(n))
    trans = {}
    for x in states:
        entries = set()
        for _ in range(rng.randint(1, 2)):
            succ = TARGET if rng.random() < 0.4 else rng.choice(states)
            entries.add((succ, rng.choice(alphabet), rng.randint(1, 5)))
        trans[x] = tuple(sorted(entries))
    return WeightedTs(states, tuple(alphabet), trans, states[0])


def random_wmm(rng: random.Random, alphabet=("a", "b", "c"), max_states: int = 4) -> WeightedMealy:
    n = rng.randint(2, max_states)
    states = tuple(f"q{i}" for i in range(n))
    delta = {}
    for y in states:
        row = {}
        for a in alphabet:
            entries = tuple(
                (rng.choice(states), rng.random() < 0.25, rng.randint(0, 5))
                for _ in range(rng.randint(0, 2))
            )
            if entries:
                row[a] = entries
        delta[y] = row
    return WeightedMealy(states, tuple(alphabet), delta, states[0])


def random_rm(rng: random.Random, alphabet=("a", "b", "c"), bound: int = 3, max_states: int = 3) -> RewardMachine:
    n = rng.randint(1, max_states)
    states = tuple(f"r{i}" for i in range(n))
    delta = {
        y: {a: (rng.choice(states), rng.randint(1, bound)) for a in alphabet}
        for y in states
    }
    return RewardMachine(states, tuple(alphabet), bound, delta, states[0])


def random_cost_mc(rng: random.Random, weight_bound: int = 3, max_states: int = 6) -> LabeledMc:
    alphabet = tuple(str(j) for j in range(1, weight_bound + 1))
    return random_mc(rng, alphabet, max_states)


def random_instance(pairing: str, rng: random.Random):
    """A (system, requirement) pair for the given pairing."""
    if pairing == "mc-dfa":
        return random_mc(rng), random_dfa(rng)
    if pairing == "mrm-dfa":
        return random_mrm(rng), random_dfa(rng)
    if pairing == "mc-costdfa":
        weight_bound = rng.randint(1, 3)
        budget = rng.randint(1, 3)
        return random_cost_mc(rng, weight_bound), make_cost_bound_dfa(budget, weight_bound)
    if pairing == "ntmc-dfa":
        return random_ntmc(rng), random_dfa(rng)
    if pairing == "wts-nfa":
        return random_wts(rng), random_nfa(rng)
    if pairing == "wts-wmm":
        return random_wts(rng), random_wmm(rng)
    raise ValueError(f"unknown pairing {pairing!r}")


def run_step_equality_batch(
    pairing: str, instances: int, kmax: int, seed: int
) -> CheckResult:
    """Step equality over a seeded batch of random instances."""
    for i in range(instances):
        rng = random.Random(f"{seed}:{pairing}:{i}")
        system, requirement = random_instance(pairing, rng)
        res = check_step_equality(pairing, system, requirement, kmax)
        if not res.passed:
            ce = dict(res.counterexample or {})
            ce["instance"] = i
            ce["seed"] = seed
            return CheckResult(res.name, False, ce, {"pairing": pairing, "instances": instances, "kmax": kmax, "seed": seed})
    return CheckResult(
        f"step-equality[{pairing}]",
        True,
        None,
        {"pairing": pairing, "instances": instances, "kmax": kmax, "seed": seed},
    )
