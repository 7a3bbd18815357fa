"""Depth-bounded direct trace semantics and the inference queries.

This module is the ground-truth side of every correctness check: it
unfolds each machine for a bounded number of steps, materializing the
trace distribution / language / weighted trace set it denotes, and then
evaluates the requested query on those values directly.  Nothing here
ever looks at a synchronized product.

The ``*_step`` functions fold the semantic values of the successor states
one transition backwards; iterating them from the empty value yields the
depth-``k`` semantics.  They are also reused on raw sampled values by the
commutation checks in :mod:`qtrace.lawcheck`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .domains import INF, ONE, ZERO
from .models import (
    Dfa,
    LabeledMc,
    MarkovRewardModel,
    Nfa,
    NonTerminatingMc,
    RewardMachine,
    TARGET,
    WeightedMealy,
    WeightedTs,
    nfa_row,
    wmm_row,
)

Trace = tuple[str, ...]
TraceDist = dict[Trace, Fraction]
TraceRewardDist = dict[tuple[Trace, int], Fraction]
TraceWeightSet = set[tuple[Trace, int]]
LangSet = set[Trace]


# ---------------------------------------------------------------------------
# one-step semantic updates

def mc_trace_step(
    successors: Iterable[tuple[TraceDist, Fraction]],
    halt_mass: Fraction,
    symbol: str,
) -> TraceDist:
    """Prepend ``symbol`` to the successor trace distributions.

    ``halt_mass`` is the probability of terminating right after emitting
    ``symbol``; it becomes the mass of the one-symbol trace.
    """
    out: TraceDist = {}
    if halt_mass:
        out[(symbol,)] = halt_mass
    for dist, p in successors:
        for w, q in dist.items():
            t = (symbol, *w)
            out[t] = out.get(t, ZERO) + p * q
    return out


def mrm_trace_step(
    successors: Iterable[tuple[TraceRewardDist, Fraction]],
    halt_mass: Fraction,
    step_reward: int,
    symbol: str,
) -> TraceRewardDist:
    """As :func:`mc_trace_step` but also accumulating the step reward."""
    out: TraceRewardDist = {}
    if halt_mass:
        out[((symbol,), step_reward)] = halt_mass
    for dist, p in successors:
        for (w, m), q in dist.items():
            key = ((symbol, *w), step_reward + m)
            out[key] = out.get(key, ZERO) + p * q
    return out


def dfa_lang_step(row: Mapping[str, tuple[LangSet, bool]]) -> LangSet:
    """Accepted words reachable in one deterministic step.

    ``row`` maps each symbol to (successor's accepted set, step flag).
    """
    out: LangSet = set()
    for a, (lang, flag) in row.items():
        if flag:
            out.add((a,))
        for w in lang:
            out.add((a, *w))
    return out


def nfa_lang_step(row: Mapping[str, Iterable[tuple[LangSet, bool]]]) -> LangSet:
    out: LangSet = set()
    for a, entries in row.items():
        for lang, flag in entries:
            if flag:
                out.add((a,))
            for w in lang:
                out.add((a, *w))
    return out


def wts_trace_step(transitions: Iterable[tuple[TraceWeightSet | None, str, int]]) -> TraceWeightSet:
    """Weighted traces after one step; ``None`` marks a terminating edge."""
    out: TraceWeightSet = set()
    for value, a, m in transitions:
        if value is None:
            out.add(((a,), m))
        else:
            for w, n in value:
                out.add(((a, *w), m + n))
    return out


def wmm_trace_step(row: Mapping[str, Iterable[tuple[TraceWeightSet, bool, int]]]) -> TraceWeightSet:
    out: TraceWeightSet = set()
    for a, entries in row.items():
        for value, flag, m in entries:
            if flag:
                out.add(((a,), m))
            for w, n in value:
                out.add(((a, *w), m + n))
    return out


def rm_seq_step(
    row: Mapping[str, tuple[dict[Trace, tuple[int, ...]], int]],
) -> dict[Trace, tuple[int, ...]]:
    """Weight sequences assigned after one deterministic transducer step."""
    out: dict[Trace, tuple[int, ...]] = {}
    for a, (table, w) in row.items():
        out[(a,)] = (w,)
        for word, seq in table.items():
            out[(a, *word)] = (w, *seq)
    return out


def marginal_step(
    successors: Iterable[tuple[TraceDist, Fraction]], symbol: str
) -> TraceDist:
    """One-step extension of fixed-depth trace marginals."""
    out: TraceDist = {}
    for dist, p in successors:
        for w, q in dist.items():
            t = (symbol, *w)
            out[t] = out.get(t, ZERO) + p * q
    return out


# ---------------------------------------------------------------------------
# depth-bounded semantics (iterated steps, all states at once)

def mc_semantics_levels(c: LabeledMc, depth: int) -> list[dict[str, TraceDist]]:
    """Depth 0..depth trace distributions for every state."""
    levels: list[dict[str, TraceDist]] = [{x: {} for x in c.states}]
    for _ in range(depth):
        prev = levels[-1]
        cur: dict[str, TraceDist] = {}
        for x in c.states:
            row = c.trans[x]
            halt = row.get(TARGET, ZERO)
            succ = [(prev[s], p) for s, p in row.items() if s != TARGET]
            cur[x] = mc_trace_step(succ, halt, c.label[x])
        levels.append(cur)
    return levels


def mc_semantics(c: LabeledMc, state: str, depth: int) -> TraceDist:
    """Distribution over the traces of length <= depth that terminate."""
    return mc_semantics_levels(c, depth)[depth][state]


def mrm_semantics_levels(c: MarkovRewardModel, depth: int) -> list[dict[str, TraceRewardDist]]:
    levels: list[dict[str, TraceRewardDist]] = [{x: {} for x in c.states}]
    for _ in range(depth):
        prev = levels[-1]
        cur: dict[str, TraceRewardDist] = {}
        for x in c.states:
            row = c.trans[x]
            halt = row.get(TARGET, ZERO)
            succ = [(prev[s], p) for s, p in row.items() if s != TARGET]
            cur[x] = mrm_trace_step(succ, halt, c.reward[x], c.label[x])
        levels.append(cur)
    return levels


def mrm_semantics(c: MarkovRewardModel, state: str, depth: int) -> TraceRewardDist:
    """Joint distribution over (trace, accumulated reward) pairs."""
    return mrm_semantics_levels(c, depth)[depth][state]


def dfa_language_levels(d: Dfa, depth: int) -> list[dict[str, LangSet]]:
    levels: list[dict[str, LangSet]] = [{y: set() for y in d.states}]
    for _ in range(depth):
        prev = levels[-1]
        cur = {
            y: dfa_lang_step({a: (prev[t], f) for a, (t, f) in d.delta[y].items()})
            for y in d.states
        }
        levels.append(cur)
    return levels


def dfa_language(d: Dfa, state: str, depth: int) -> LangSet:
    """Accepted words of length 1..depth from ``state``."""
    return dfa_language_levels(d, depth)[depth][state]


def nfa_language_levels(d: Nfa, depth: int) -> list[dict[str, LangSet]]:
    levels: list[dict[str, LangSet]] = [{y: set() for y in d.states}]
    for _ in range(depth):
        prev = levels[-1]
        cur = {}
        for y in d.states:
            row = {
                a: [(prev[t], f) for t, f in nfa_row(d, y, a)] for a in d.alphabet
            }
            cur[y] = nfa_lang_step(row)
        levels.append(cur)
    return levels


def nfa_language(d: Nfa, state: str, depth: int) -> LangSet:
    return nfa_language_levels(d, depth)[depth][state]


def wts_semantics_levels(c: WeightedTs, depth: int) -> list[dict[str, TraceWeightSet]]:
    levels: list[dict[str, TraceWeightSet]] = [{x: set() for x in c.states}]
    for _ in range(depth):
        prev = levels[-1]
        cur = {}
        for x in c.states:
            cur[x] = wts_trace_step(
                (None if succ == TARGET else prev[succ], a, m)
                for succ, a, m in c.trans[x]
            )
        levels.append(cur)
    return levels


def wts_semantics(c: WeightedTs, state: str, depth: int) -> TraceWeightSet:
    """(trace, accumulated cost) pairs of terminating runs within ``depth``."""
    return wts_semantics_levels(c, depth)[depth][state]


def wmm_semantics_levels(d: WeightedMealy, depth: int) -> list[dict[str, TraceWeightSet]]:
    levels: list[dict[str, TraceWeightSet]] = [{y: set() for y in d.states}]
    for _ in range(depth):
        prev = levels[-1]
        cur = {}
        for y in d.states:
            row = {
                a: [(prev[t], f, m) for t, f, m in wmm_row(d, y, a)]
                for a in d.alphabet
            }
            cur[y] = wmm_trace_step(row)
        levels.append(cur)
    return levels


def wmm_semantics(d: WeightedMealy, state: str, depth: int) -> TraceWeightSet:
    """(accepted trace, accumulated penalty) pairs within ``depth``."""
    return wmm_semantics_levels(d, depth)[depth][state]


def rm_semantics(d: RewardMachine, state: str, depth: int) -> dict[Trace, tuple[int, ...]]:
    """Weight sequence assigned to every word of length 1..depth."""
    levels: list[dict[str, dict[Trace, tuple[int, ...]]]] = [{y: {} for y in d.states}]
    for _ in range(depth):
        prev = levels[-1]
        cur = {}
        for y in d.states:
            row = {a: (prev[t], w) for a, (t, w) in d.delta[y].items()}
            cur[y] = rm_seq_step(row)
        levels.append(cur)
    return levels[depth][state]


def rm_weights(d: RewardMachine, state: str, word: Trace) -> tuple[int, ...]:
    """Weight sequence of a single word (one run of the transducer)."""
    cur = state
    seq = []
    for a in word:
        cur, w = d.delta[cur][a]
        seq.append(w)
    return tuple(seq)


def ntmc_marginal_levels(c: NonTerminatingMc, depth: int) -> list[dict[str, TraceDist]]:
    levels: list[dict[str, TraceDist]] = [{x: {(): ONE} for x in c.states}]
    for _ in range(depth):
        prev = levels[-1]
        cur = {}
        for x in c.states:
            succ = [(prev[s], p) for s, p in c.trans[x].items()]
            cur[x] = marginal_step(succ, c.label[x])
        levels.append(cur)
    return levels


def ntmc_marginal(c: NonTerminatingMc, state: str, depth: int) -> TraceDist:
    """Exact distribution of the first ``depth`` emitted symbols."""
    if depth < 1:
        raise ValueError("marginal depth must be at least 1")
    return ntmc_marginal_levels(c, depth)[depth][state]


def marginalize(dist: TraceDist, depth: int) -> TraceDist:
    """Project a fixed-length trace distribution onto its first ``depth`` symbols."""
    out: TraceDist = {}
    for w, p in dist.items():
        key = w[:depth]
        out[key] = out.get(key, ZERO) + p
    return out


# ---------------------------------------------------------------------------
# word membership without materializing whole languages

def dfa_accepts(d: Dfa, state: str, word: Trace) -> bool:
    """True when the run over ``word`` ends with an accepting transition."""
    if not word:
        return False
    cur = state
    flag = False
    for a in word:
        cur, flag = d.delta[cur][a]
    return flag


def nfa_accepts(d: Nfa, state: str, word: Trace) -> bool:
    if not word:
        return False
    current = {state}
    for a in word[:-1]:
        current = {t for y in current for t, _ in nfa_row(d, y, a)}
        if not current:
            return False
    return any(f for y in current for _, f in nfa_row(d, y, word[-1]))


class DfaLanguage:
    """Lazy view of the depth-bounded accepted word set (supports ``in``)."""

    def __init__(self, d: Dfa, state: str, max_len: int):
        self.d = d
        self.state = state
        self.max_len = max_len
        self._memo: dict[Trace, bool] = {}

    def __contains__(self, word: Trace) -> bool:
        if not 1 <= len(word) <= self.max_len:
            return False
        got = self._memo.get(word)
        if got is None:
            got = dfa_accepts(self.d, self.state, word)
            self._memo[word] = got
        return got


class NfaLanguage:
    """Lazy view of the depth-bounded accepted word set of an NFA."""

    def __init__(self, d: Nfa, state: str, max_len: int):
        self.d = d
        self.state = state
        self.max_len = max_len
        self._memo: dict[Trace, bool] = {}

    def __contains__(self, word: Trace) -> bool:
        if not 1 <= len(word) <= self.max_len:
            return False
        got = self._memo.get(word)
        if got is None:
            got = nfa_accepts(self.d, self.state, word)
            self._memo[word] = got
        return got


def wmm_min_weight(d: WeightedMealy, state: str, word: Trace):
    """Least accumulated weight over the accepting runs of ``word``.

    Equals the smallest ``n`` with ``(word, n)`` in the depth-``k``
    semantics from ``state``, for any ``k >= len(word)``; infinity when no
    run accepts.  Computed by a forward min-cost sweep instead of
    materializing the whole weighted trace set.
    """
    if not word:
        return INF
    costs = {state: 0}
    for a in word[:-1]:
        nxt: dict[str, int] = {}
        for s, c in costs.items():
            for t, _, m in wmm_row(d, s, a):
                if t not in nxt or c + m < nxt[t]:
                    nxt[t] = c + m
        if not nxt:
            return INF
        costs = nxt
    best = INF
    for s, c in costs.items():
        for _, flag, m in wmm_row(d, s, word[-1]):
            if flag and c + m < best:
                best = c + m
    return best


def prefix_minimal_accept(d: Dfa, state: str, word: Trace) -> bool:
    """True when ``word`` is accepted and no proper prefix already was.

    These prefix-minimal words stratify a language into disjoint layers so
    that summing their masses never counts a continuation twice.
    """
    cur = state
    seen = False
    minimal = False
    for a in word:
        cur, flag = d.delta[cur][a]
        minimal = flag and not seen
        seen = seen or minimal
    return minimal


# ---------------------------------------------------------------------------
# partition and queries

def partition(words: LangSet, depth: int) -> list[LangSet]:
    """Stratify ``words`` into prefix-minimal layers by length 1..depth."""
    minimal: LangSet = set()
    layers: list[LangSet] = []
    for i in range(1, depth + 1):
        layer = {
            w
            for w in words
            if len(w) == i and not any(w[:j] in minimal for j in range(1, i))
        }
        minimal |= layer
        layers.append(layer)
    return layers


def query_prob(dist: TraceDist, lang) -> Fraction:
    """Probability mass of the traces that belong to ``lang``."""
    return sum((p for w, p in dist.items() if w in lang), ZERO)


def query_cond(dist: TraceDist, lang, condition) -> Fraction | None:
    """Conditional acceptance probability; None when the condition has mass 0."""
    den = sum((p for w, p in dist.items() if w in condition), ZERO)
    if den == 0:
        return None
    num = sum((p for w, p in dist.items() if w in lang and w in condition), ZERO)
    return num / den


def query_reward(dist: TraceRewardDist, lang) -> tuple[Fraction, Fraction]:
    """Acceptance probability and partial expected reward over ``lang``."""
    p_total = ZERO
    r_total = ZERO
    for (w, m), p in dist.items():
        if w in lang:
            p_total += p
            r_total += m * p
    return (p_total, r_total)


def query_tropical(pairs: TraceWeightSet, lang):
    """Least accumulated cost among accepted traces (infinity when none)."""
    best = INF
    for w, m in pairs:
        if m < best and w in lang:
            best = m
    return best


def query_wmm(pairs: TraceWeightSet, accepted: TraceWeightSet):
    """Least combined system + requirement weight over shared traces."""
    cheapest: dict[Trace, int] = {}
    for w, n in accepted:
        if w not in cheapest or n < cheapest[w]:
            cheapest[w] = n
    best = INF
    for w, m in pairs:
        n = cheapest.get(w)
        if n is not None and m + n < best:
            best = m + n
    return best


def query_cost_bounded(dist: TraceDist, budget: int) -> Fraction:
    """Mass of the weight words whose sum stays strictly below ``budget``."""
    total = ZERO
    for w, p in dist.items():
        if sum(int(a) for a in w) < budget:
            total += p
    return total


def query_cost_induced(
    dist: TraceDist,
    weights: Callable[[Trace], tuple[int, ...]] | Mapping[Trace, tuple[int, ...]],
    budget: int,
) -> Fraction:
    """Mass of the traces whose induced weight sequence sums below ``budget``."""
    lookup = weights if callable(weights) else weights.__getitem__
    total = ZERO
    for w, p in dist.items():
        if sum(lookup(w)) < budget:
            total += p
    return total


def query_safety(
    c: NonTerminatingMc, state: str, d: Dfa, monitor_state: str, depth: int
) -> Fraction:
    """Probability that a run is accepted within ``depth`` steps.

    Sums, per length i <= depth, the marginal mass of the prefix-minimal
    accepted words of length i; this is a lower bound of the unbounded
    acceptance probability and is nondecreasing in ``depth``.
    """
    levels = ntmc_marginal_levels(c, depth)
    total = ZERO
    for i in range(1, depth + 1):
        for w, p in levels[i][state].items():
            if prefix_minimal_accept(d, monitor_state, w):
                total += p
    return total
