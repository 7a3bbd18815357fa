#!/usr/bin/env python3
"""Compare the exact solver against floating-point value iteration.

The package itself computes with exact rationals only; this script is the
one place floats appear, to show what the exactness costs.  For growing
random products it times

  * exact linear solving (fraction-free elimination),
  * exact value iteration to a rational epsilon,
  * float value iteration (vectorized with numpy when available),

and reports the worst float deviation from the exact answer.

Run:  python benchmarks/bench_modes.py [--states N] [--seed S]
"""

from __future__ import annotations

import argparse
import random
import time
from fractions import Fraction

from qtrace.lawcheck import random_dfa, random_mc
from qtrace.models import ACCEPT
from qtrace.products import pair_states, product_mc_dfa
from qtrace.solvers import solve_reach_prob

try:
    import numpy as np
except ImportError:  # the benchmark degrades to pure-python float loops
    np = None


def float_value_iteration(product, sweeps: int = 2000, tol: float = 1e-12):
    states = list(pair_states(product))
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    if np is not None:
        matrix = np.zeros((n, n))
        offset = np.zeros(n)
        for s in states:
            for t, p in product.trans[s].items():
                if t in index:
                    matrix[index[s], index[t]] = float(p)
                elif t == ACCEPT:
                    offset[index[s]] = float(p)
        values = np.zeros(n)
        for i in range(sweeps):
            nxt = matrix @ values + offset
            if np.max(np.abs(nxt - values)) < tol:
                return dict(zip(states, nxt)), i + 1
            values = nxt
        return dict(zip(states, values)), sweeps
    rows = [
        (
            index[s],
            float(product.trans[s].get(ACCEPT, 0)),
            [(index[t], float(p)) for t, p in product.trans[s].items() if t in index],
        )
        for s in states
    ]
    values = [0.0] * n
    for i in range(sweeps):
        nxt = [acc + sum(p * values[j] for j, p in succ) for _, acc, succ in rows]
        if max(abs(a - b) for a, b in zip(nxt, values)) < tol:
            return dict(zip(states, nxt)), i + 1
        values = nxt
    return dict(zip(states, values)), sweeps


def bench(states: int, seed: int) -> None:
    rng = random.Random(seed)
    product = product_mc_dfa(
        random_mc(rng, max_states=states), random_dfa(rng, max_states=4), restrict=False
    )
    n = len(pair_states(product))

    t0 = time.perf_counter()
    exact = solve_reach_prob(product, "exact")
    t_exact = time.perf_counter() - t0

    t0 = time.perf_counter()
    solve_reach_prob(product, "epsilon", epsilon=Fraction(1, 10**12))
    t_eps = time.perf_counter() - t0

    t0 = time.perf_counter()
    floats, sweeps = float_value_iteration(product)
    t_float = time.perf_counter() - t0

    worst = max(abs(float(exact.values[s]) - floats[s]) for s in floats)
    backend = "numpy" if np is not None else "pure-python"
    print(
        f"n={n:4d}  exact-linear {t_exact*1e3:8.2f} ms"
        f"  exact-iter {t_eps*1e3:8.2f} ms"
        f"  float-iter({backend}) {t_float*1e3:8.2f} ms ({sweeps} sweeps)"
        f"  max|float-exact| {worst:.2e}"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--states", type=int, default=0, help="single run at this system size")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    if args.states:
        bench(args.states, args.seed)
        return
    for states in (6, 12, 25, 50):
        bench(states, args.seed)


if __name__ == "__main__":
    main()
