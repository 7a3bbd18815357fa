"""Synchronized products of a system with a requirement.

Each construction pairs the system's transition structure with the
requirement's step relation, producing a query-agnostic machine over the
joint state space plus distinguished sinks.  The ``*_row`` functions
contain the actual pairing rule for a single transition row; they are
deliberately independent of state identity so the same rule can be
exercised on raw semantic values by the commutation checks.

By default products are restricted to the states reachable from the pair
of initial states; ``restrict=False`` builds the full cartesian space,
which the equality checks quantify over.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .domains import ONE, ZERO
from .models import (
    ABSORB,
    ACCEPT,
    Dfa,
    LabeledMc,
    MarkovRewardModel,
    ModelError,
    Nfa,
    NonTerminatingMc,
    REJECT,
    TARGET,
    WeightedMealy,
    WeightedTs,
    joined,
    nfa_row,
    require_same_alphabet,
    wmm_row,
)

SINKS = (ACCEPT, REJECT, ABSORB)


@dataclass(frozen=True)
class ProductMc:
    """Unlabeled Markov chain over state pairs with accept/reject sinks."""

    states: tuple[str, ...]
    trans: dict[str, dict[str, Fraction]]
    initial: str


@dataclass(frozen=True)
class ProductRewardMc:
    """Product chain that additionally earns the system's reward per step."""

    states: tuple[str, ...]
    trans: dict[str, dict[str, Fraction]]
    stepreward: dict[str, int]
    initial: str


@dataclass(frozen=True)
class AbsorbingProductMc:
    """Product of a never-terminating chain with a monitor; acceptance absorbs."""

    states: tuple[str, ...]
    trans: dict[str, dict[str, Fraction]]
    initial: str


@dataclass(frozen=True)
class ProductWts:
    """Weighted product; rows are finite sets of (successor-or-sink, weight)."""

    states: tuple[str, ...]
    trans: dict[str, tuple[tuple[str, int], ...]]
    initial: str


def pair_states(product) -> tuple[str, ...]:
    """The non-sink states of a product."""
    return tuple(s for s in product.states if s not in SINKS)


def validate_product(m) -> list[str]:
    out: list[str] = []
    pairs = set(pair_states(m))
    if isinstance(m, (ProductMc, ProductRewardMc, AbsorbingProductMc)):
        allowed = pairs | (
            {ABSORB} if isinstance(m, AbsorbingProductMc) else {ACCEPT, REJECT}
        )
        for s in pairs:
            row = m.trans.get(s)
            if row is None:
                out.append(f"no transition row at product state {s!r}")
                continue
            total = ZERO
            for succ, p in row.items():
                if succ not in allowed:
                    out.append(f"unknown successor {succ!r} at product state {s!r}")
                if not isinstance(p, Fraction) or p <= 0 or p > 1:
                    out.append(f"probability {p!r} at product state {s!r} not in (0, 1]")
                    continue
                total += p
            if total != ONE:
                out.append(f"row sum != 1 at product state {s!r} (got {total})")
        if isinstance(m, ProductRewardMc):
            for s in pairs:
                r = m.stepreward.get(s)
                if not isinstance(r, int) or r < 0:
                    out.append(f"step reward at {s!r} is not a natural number")
    elif isinstance(m, ProductWts):
        allowed = pairs | {ACCEPT, REJECT}
        for s in pairs:
            for succ, w in m.trans.get(s, ()):
                if succ not in allowed:
                    out.append(f"unknown successor {succ!r} at product state {s!r}")
                if not isinstance(w, int) or w < 0:
                    out.append(f"weight {w!r} at product state {s!r} is not natural")
    if m.initial not in pairs:
        out.append(f"initial state {m.initial!r} not in product state set")
    return out


# ---------------------------------------------------------------------------
# pairing rules for a single transition row

def mc_dfa_row(
    successors: Iterable[tuple[object, Fraction]],
    halt_mass: Fraction,
    symbol: str,
    dfa_row,
):
    """Synchronize one probabilistic row with one deterministic step table.

    Every successor is paired with the monitor state reached on ``symbol``;
    the terminating mass lands in the sink named by the step's flag.
    Returns (pairs, accept mass, reject mass).
    """
    tgt, flag = dfa_row[symbol]
    pairs = [((x, tgt), p) for x, p in successors]
    if flag:
        return pairs, halt_mass, ZERO
    return pairs, ZERO, halt_mass


def mrm_dfa_row(successors, halt_mass, step_reward: int, symbol: str, dfa_row):
    """As :func:`mc_dfa_row`, carrying the step reward through unchanged."""
    pairs, acc, rej = mc_dfa_row(successors, halt_mass, symbol, dfa_row)
    return pairs, acc, rej, step_reward


def ntmc_dfa_row(successors, symbol: str, dfa_row):
    """Pair a never-terminating row with a monitor step.

    An accepting step sends the whole unit mass into the absorbing sink,
    discarding the successor distribution; otherwise the distribution is
    carried along with the advanced monitor state.
    """
    tgt, flag = dfa_row[symbol]
    if flag:
        return [], ONE
    return [((x, tgt), p) for x, p in successors], ZERO


def wts_nfa_row(transitions, nfa_row_fn):
    """Cross every weighted transition with every matching automaton edge.

    ``transitions`` yields (successor-or-None, symbol, weight); ``None``
    marks termination, which turns into a flag sink carrying the weight.
    """
    out = []
    for succ, a, m in transitions:
        for tgt, flag in nfa_row_fn(a):
            if succ is None:
                out.append(((ACCEPT if flag else REJECT), m))
            else:
                out.append(((succ, tgt), m))
    return out


def wts_wmm_row(transitions, wmm_row_fn):
    """As :func:`wts_nfa_row` but adding the requirement's edge weight."""
    out = []
    for succ, a, m in transitions:
        for tgt, flag, n in wmm_row_fn(a):
            if succ is None:
                out.append(((ACCEPT if flag else REJECT), m + n))
            else:
                out.append(((succ, tgt), m + n))
    return out


# ---------------------------------------------------------------------------
# product constructions

def _explore(initial: str, expand, restrict: bool, all_pairs: list[str]) -> list[str]:
    if not restrict:
        return all_pairs
    seen = [initial]
    index = {initial}
    queue = [initial]
    while queue:
        s = queue.pop(0)
        for t in expand(s):
            if t not in index and t not in SINKS:
                index.add(t)
                seen.append(t)
                queue.append(t)
    return seen


def _check_join_unique(c, d) -> None:
    ids = {joined(x, y) for x in c.states for y in d.states}
    if len(ids) != len(c.states) * len(d.states):
        raise ModelError("state identifiers collide when joined; rename the inputs")


def product_mc_dfa(c: LabeledMc, d: Dfa, restrict: bool = True) -> ProductMc:
    """Product of a terminating chain with a deterministic requirement."""
    require_same_alphabet(c, d)
    _check_join_unique(c, d)
    rows: dict[str, dict[str, Fraction]] = {}
    back: dict[str, tuple[str, str]] = {
        joined(x, y): (x, y) for x in c.states for y in d.states
    }

    def build(s: str) -> dict[str, Fraction]:
        x, y = back[s]
        row = c.trans[x]
        succ = [(x2, p) for x2, p in row.items() if x2 != TARGET]
        pairs, acc, rej = mc_dfa_row(succ, row.get(TARGET, ZERO), c.label[x], d.delta[y])
        out: dict[str, Fraction] = {}
        for (x2, y2), p in pairs:
            out[joined(x2, y2)] = out.get(joined(x2, y2), ZERO) + p
        if acc:
            out[ACCEPT] = acc
        if rej:
            out[REJECT] = rej
        return out

    def row_of(s: str) -> dict[str, Fraction]:
        if s not in rows:
            rows[s] = build(s)
        return rows[s]

    init = joined(c.initial, d.initial)
    order = _explore(init, row_of, restrict, list(back))
    for s in order:
        row_of(s)
    states = tuple(order) + (ACCEPT, REJECT)
    return ProductMc(states=states, trans={s: rows[s] for s in order}, initial=init)


def product_mrm_dfa(c: MarkovRewardModel, d: Dfa, restrict: bool = True) -> ProductRewardMc:
    """Reward-carrying variant of :func:`product_mc_dfa`."""
    base = product_mc_dfa(
        LabeledMc(c.states, c.alphabet, c.label, c.trans, c.initial), d, restrict
    )
    back = {joined(x, y): x for x in c.states for y in d.states}
    stepreward = {s: c.reward[back[s]] for s in pair_states(base)}
    return ProductRewardMc(
        states=base.states, trans=base.trans, stepreward=stepreward, initial=base.initial
    )


def product_ntmc_dfa(c: NonTerminatingMc, d: Dfa, restrict: bool = True) -> AbsorbingProductMc:
    """Product of a never-terminating chain with a monitor; acceptance absorbs."""
    require_same_alphabet(c, d)
    _check_join_unique(c, d)
    back = {joined(x, y): (x, y) for x in c.states for y in d.states}
    rows: dict[str, dict[str, Fraction]] = {}

    def build(s: str) -> dict[str, Fraction]:
        x, y = back[s]
        succ = list(c.trans[x].items())
        pairs, absorb = ntmc_dfa_row(succ, c.label[x], d.delta[y])
        out: dict[str, Fraction] = {}
        for (x2, y2), p in pairs:
            out[joined(x2, y2)] = out.get(joined(x2, y2), ZERO) + p
        if absorb:
            out[ABSORB] = absorb
        return out

    def row_of(s: str) -> dict[str, Fraction]:
        if s not in rows:
            rows[s] = build(s)
        return rows[s]

    init = joined(c.initial, d.initial)
    order = _explore(init, row_of, restrict, list(back))
    for s in order:
        row_of(s)
    states = tuple(order) + (ABSORB,)
    return AbsorbingProductMc(states=states, trans={s: rows[s] for s in order}, initial=init)


def _product_weighted(c: WeightedTs, other, row_fn, restrict: bool) -> ProductWts:
    require_same_alphabet(c, other)
    _check_join_unique(c, other)
    back = {joined(x, y): (x, y) for x in c.states for y in other.states}
    rows: dict[str, tuple[tuple[str, int], ...]] = {}

    def build(s: str) -> tuple[tuple[str, int], ...]:
        x, y = back[s]
        transitions = [
            (None if succ == TARGET else succ, a, m) for succ, a, m in c.trans[x]
        ]
        entries = row_fn(x, y, transitions)
        out = set()
        for tgt, m in entries:
            if isinstance(tgt, tuple):
                out.add((joined(*tgt), m))
            else:
                out.add((tgt, m))
        return tuple(sorted(out))

    def successors_of(s: str) -> list[str]:
        if s not in rows:
            rows[s] = build(s)
        return [t for t, _ in rows[s]]

    init = joined(c.initial, other.initial)
    order = _explore(init, successors_of, restrict, list(back))
    for s in order:
        successors_of(s)
    states = tuple(order) + (ACCEPT, REJECT)
    return ProductWts(states=states, trans={s: rows[s] for s in order}, initial=init)


def product_wts_nfa(c: WeightedTs, d: Nfa, restrict: bool = True) -> ProductWts:
    """Product of a weighted system with a nondeterministic requirement."""
    return _product_weighted(
        c, d, lambda x, y, tr: wts_nfa_row(tr, lambda a: nfa_row(d, y, a)), restrict
    )


def product_wts_wmm(c: WeightedTs, d: WeightedMealy, restrict: bool = True) -> ProductWts:
    """Product of a weighted system with a weighted Mealy requirement."""
    return _product_weighted(
        c, d, lambda x, y, tr: wts_wmm_row(tr, lambda a: wmm_row(d, y, a)), restrict
    )
