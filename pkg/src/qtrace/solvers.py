"""Evaluate product machines: exact linear solving and fixed-point iteration.

The value of a product state is the least solution of a one-step update
equation.  Probabilistic products are solved exactly: states that cannot
reach the accepting sink are pinned to the bottom value first (this is
what selects the *least* solution), the remainder is a nonsingular linear
system solved by fraction-free elimination over the integers.  Weighted
products are solved by iterating the min-cost update until it stabilizes,
which nonnegative weights guarantee within as many rounds as there are
product states.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable

from .domains import (
    INF,
    ONE,
    PROB,
    PROB_REWARD,
    TROPICAL,
    ZERO,
    bottom_vector,
    kleene_iterate,
    kleene_lfp,
    rational_str,
)
from .products import (
    ABSORB,
    ACCEPT,
    AbsorbingProductMc,
    ProductMc,
    ProductRewardMc,
    ProductWts,
    REJECT,
    pair_states,
)


@dataclass(frozen=True)
class SolveReport:
    """Solver outcome: a value vector plus how it was obtained."""

    values: dict[str, object]
    method: str  # "exact-linear" | "kleene" | "bellman"
    iterations: int
    converged: bool
    domain: str

    def value_at(self, state: str):
        return self.values[state]

    def to_json(self) -> dict:
        def render(v):
            if isinstance(v, Fraction):
                return rational_str(v)
            if isinstance(v, tuple):
                return [render(x) for x in v]
            if v == INF:
                return "inf"
            return v

        return {
            "method": self.method,
            "iterations": self.iterations,
            "converged": self.converged,
            "domain": self.domain,
            "values": {s: render(v) for s, v in self.values.items()},
        }


# ---------------------------------------------------------------------------
# one-step value updates

def reach_value_step(successors, accept_mass: Fraction) -> Fraction:
    """Acceptance probability after one step, given successor values."""
    total = accept_mass
    for value, p in successors:
        total += p * value
    return total


def reward_value_step(successors, accept_mass: Fraction, step_reward: int):
    """Joint (probability, partial reward) update with a per-step reward.

    Accepting immediately earns the step reward; continuing earns it
    weighted by the successor's acceptance probability, plus whatever the
    successor already accumulated.
    """
    p_total = accept_mass
    r_total = step_reward * accept_mass
    for (p_val, r_val), p in successors:
        p_total += p * p_val
        r_total += p * (p_val * step_reward + r_val)
    return (p_total, r_total)


def min_cost_step(successors, accept_weights):
    """Cheapest way to accept in one more step: direct or via a successor."""
    best = INF
    for m in accept_weights:
        if m < best:
            best = m
    for value, m in successors:
        cand = value + m
        if cand < best:
            best = cand
    return best


# ---------------------------------------------------------------------------
# transformers

def reach_transformer(m: ProductMc | AbsorbingProductMc) -> Callable[[dict], dict]:
    accept_key = ABSORB if isinstance(m, AbsorbingProductMc) else ACCEPT
    compiled = []
    for s in pair_states(m):
        row = m.trans[s]
        acc = row.get(accept_key, ZERO)
        succ = [(t, p) for t, p in row.items() if t not in (ACCEPT, REJECT, ABSORB)]
        compiled.append((s, acc, succ))

    def phi(u: dict) -> dict:
        return {
            s: reach_value_step(((u[t], p) for t, p in succ), acc)
            for s, acc, succ in compiled
        }

    return phi


def reward_transformer(m: ProductRewardMc) -> Callable[[dict], dict]:
    compiled = []
    for s in pair_states(m):
        row = m.trans[s]
        acc = row.get(ACCEPT, ZERO)
        succ = [(t, p) for t, p in row.items() if t not in (ACCEPT, REJECT)]
        compiled.append((s, acc, succ, m.stepreward[s]))

    def phi(u: dict) -> dict:
        return {
            s: reward_value_step(((u[t], p) for t, p in succ), acc, n)
            for s, acc, succ, n in compiled
        }

    return phi


def tropical_transformer(m: ProductWts) -> Callable[[dict], dict]:
    compiled = []
    for s in pair_states(m):
        acc = [w for t, w in m.trans[s] if t == ACCEPT]
        succ = [(t, w) for t, w in m.trans[s] if t not in (ACCEPT, REJECT)]
        compiled.append((s, acc, succ))

    def phi(u: dict) -> dict:
        return {
            s: min_cost_step(((u[t], w) for t, w in succ), acc)
            for s, acc, succ in compiled
        }

    return phi


def product_transformer(m) -> Callable[[dict], dict]:
    """One-step value update of any product kind."""
    if isinstance(m, ProductRewardMc):
        return reward_transformer(m)
    if isinstance(m, (ProductMc, AbsorbingProductMc)):
        return reach_transformer(m)
    if isinstance(m, ProductWts):
        return tropical_transformer(m)
    raise TypeError(f"not a product: {type(m).__name__}")


def product_domain(m) -> str:
    if isinstance(m, ProductRewardMc):
        return PROB_REWARD
    if isinstance(m, (ProductMc, AbsorbingProductMc)):
        return PROB
    if isinstance(m, ProductWts):
        return TROPICAL
    raise TypeError(f"not a product: {type(m).__name__}")


# ---------------------------------------------------------------------------
# exact linear solving

def _states_reaching(m, goal: str) -> set[str]:
    """States with a positive-probability path to ``goal``."""
    incoming: dict[str, list[str]] = {}
    for s in pair_states(m):
        for t in m.trans[s]:
            incoming.setdefault(t, []).append(s)
    seen: set[str] = set()
    queue = list(incoming.get(goal, []))
    while queue:
        s = queue.pop()
        if s in seen:
            continue
        seen.add(s)
        queue.extend(incoming.get(s, []))
    return seen


def _solve_linear(unknowns: list[str], coeff: dict[str, dict[str, Fraction]], rhs: dict[str, Fraction]) -> dict[str, Fraction]:
    """Solve (I - coeff) v = rhs exactly by fraction-free elimination.

    Rows are first scaled to integers; forward elimination keeps every
    intermediate entry an exact integer (Bareiss scheme), and back
    substitution recovers the rational solution.
    """
    n = len(unknowns)
    index = {s: i for i, s in enumerate(unknowns)}
    mat: list[list[int]] = []
    for s in unknowns:
        row = [ZERO] * (n + 1)
        row[index[s]] = ONE
        for t, p in coeff[s].items():
            if t in index:
                row[index[t]] -= p
        row[n] = rhs[s]
        scale = lcm(*(f.denominator for f in row)) if row else 1
        mat.append([int(f * scale) for f in row])

    prev = 1
    for k in range(n):
        pivot_row = next((i for i in range(k, n) if mat[i][k] != 0), None)
        if pivot_row is None:
            raise AssertionError("reduced system is singular; zero-pinning failed")
        if pivot_row != k:
            mat[k], mat[pivot_row] = mat[pivot_row], mat[k]
        pivot = mat[k][k]
        for i in range(k + 1, n):
            factor = mat[i][k]
            row_i = mat[i]
            row_k = mat[k]
            for j in range(k, n + 1):
                row_i[j] = (row_i[j] * pivot - factor * row_k[j]) // prev
        prev = pivot

    solution: list[Fraction] = [ZERO] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(mat[i][n])
        for j in range(i + 1, n):
            acc -= mat[i][j] * solution[j]
        solution[i] = acc / mat[i][i]
    return {s: solution[index[s]] for s in unknowns}


def solve_reach_prob(
    m: ProductMc | AbsorbingProductMc,
    mode: str = "exact",
    steps: int | None = None,
    epsilon: Fraction | None = None,
    max_iter: int = 100_000,
) -> SolveReport:
    """Probability of reaching the accepting sink, per product state.

    ``exact``      -- pin unreachable-accept states to 0, solve the rest
                      as a linear system; the result is the least fixed
                      point and satisfies the update equation bit for bit.
    ``iterate``    -- the ``steps``-th iterate from the all-zero vector.
    ``epsilon``    -- iterate until the largest pointwise change is below
                      ``epsilon`` (still exact arithmetic).
    """
    phi = reach_transformer(m)
    states = list(pair_states(m))
    if mode == "iterate":
        if steps is None:
            raise ValueError("iterate mode needs steps")
        values = kleene_iterate(phi, bottom_vector(states, PROB), steps)
        return SolveReport(values, "kleene", steps, False, PROB)
    if mode == "epsilon":
        if epsilon is None:
            raise ValueError("epsilon mode needs epsilon")
        res = kleene_lfp(phi, bottom_vector(states, PROB), epsilon, max_iter, PROB)
        return SolveReport(res.values, "kleene", res.iterations, res.converged, PROB)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")

    accept_key = ABSORB if isinstance(m, AbsorbingProductMc) else ACCEPT
    live = _states_reaching(m, accept_key)
    unknowns = [s for s in states if s in live]
    values: dict[str, Fraction] = {s: ZERO for s in states}
    if unknowns:
        coeff = {
            s: {t: p for t, p in m.trans[s].items() if t in live} for s in unknowns
        }
        rhs = {s: m.trans[s].get(accept_key, ZERO) for s in unknowns}
        values.update(_solve_linear(unknowns, coeff, rhs))
    assert phi(values) == values, "exact solution does not satisfy the update equation"
    return SolveReport(values, "exact-linear", 0, True, PROB)


def solve_partial_expected_reward(
    m: ProductRewardMc,
    mode: str = "exact",
    steps: int | None = None,
    epsilon: Fraction | None = None,
    max_iter: int = 100_000,
) -> SolveReport:
    """(acceptance probability, partial expected reward) per product state.

    Exact mode solves the probability system first and then the reward
    system against it; both share the same pinned state set, so rewards
    stay finite.
    """
    phi = reward_transformer(m)
    states = list(pair_states(m))
    if mode == "iterate":
        if steps is None:
            raise ValueError("iterate mode needs steps")
        values = kleene_iterate(phi, bottom_vector(states, PROB_REWARD), steps)
        return SolveReport(values, "kleene", steps, False, PROB_REWARD)
    if mode == "epsilon":
        if epsilon is None:
            raise ValueError("epsilon mode needs epsilon")
        res = kleene_lfp(
            phi, bottom_vector(states, PROB_REWARD), epsilon, max_iter, PROB_REWARD
        )
        return SolveReport(res.values, "kleene", res.iterations, res.converged, PROB_REWARD)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")

    base = ProductMc(states=m.states, trans=m.trans, initial=m.initial)
    prob = solve_reach_prob(base, "exact").values
    live = _states_reaching(m, ACCEPT)
    unknowns = [s for s in states if s in live]
    reward: dict[str, Fraction] = {s: ZERO for s in states}
    if unknowns:
        coeff = {
            s: {t: p for t, p in m.trans[s].items() if t in live} for s in unknowns
        }
        rhs = {s: m.stepreward[s] * prob[s] for s in unknowns}
        reward.update(_solve_linear(unknowns, coeff, rhs))
    values = {s: (prob[s], reward[s]) for s in states}
    assert phi(values) == values, "exact solution does not satisfy the update equation"
    return SolveReport(values, "exact-linear", 0, True, PROB_REWARD)


def solve_tropical(
    m: ProductWts,
    mode: str = "bellman",
    steps: int | None = None,
) -> SolveReport:
    """Least cost of reaching the accepting sink, per product state.

    Bellman mode iterates the min-cost update from the all-infinity
    vector until it stabilizes; with nonnegative weights this happens
    within (number of product states + 1) rounds.
    """
    phi = tropical_transformer(m)
    states = list(pair_states(m))
    if mode == "iterate":
        if steps is None:
            raise ValueError("iterate mode needs steps")
        values = kleene_iterate(phi, bottom_vector(states, TROPICAL), steps)
        return SolveReport(values, "kleene", steps, False, TROPICAL)
    if mode != "bellman":
        raise ValueError(f"unknown mode {mode!r}")
    bound = len(states) + 1
    res = kleene_lfp(phi, bottom_vector(states, TROPICAL), None, bound + 1, TROPICAL)
    assert res.converged, "min-cost iteration did not stabilize within the state bound"
    return SolveReport(res.values, "bellman", res.iterations, True, TROPICAL)


def solve_product(m, mode: str | None = None, **kw) -> SolveReport:
    """Solve any product kind with its default or requested mode."""
    if isinstance(m, ProductRewardMc):
        return solve_partial_expected_reward(m, mode or "exact", **kw)
    if isinstance(m, (ProductMc, AbsorbingProductMc)):
        return solve_reach_prob(m, mode or "exact", **kw)
    if isinstance(m, ProductWts):
        return solve_tropical(m, mode or "bellman", **kw)
    raise TypeError(f"not a product: {type(m).__name__}")
