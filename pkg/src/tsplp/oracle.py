"""Exact TSP references and the Miller-Tucker-Zemlin export.

Both exact oracles accumulate a tour's legs left to right starting at the
depot, exactly like :func:`tsplp.instance.tour_cost`, so equal tours give
bitwise-equal costs across all three.
"""

from __future__ import annotations

import itertools
from typing import Tuple

import numpy as np

from .errors import DomainError
from .instance import TspInstance
from .lpio import _write_text, render_mps

BRUTE_FORCE_MAX_N = 10
HELD_KARP_MAX_N = 17


def brute_force_opt(instance: TspInstance) -> Tuple[float, Tuple[int, ...]]:
    """Cheapest tour by full enumeration; ties go to the lexicographically smallest."""
    n = instance.n
    if not 3 <= n <= BRUTE_FORCE_MAX_N:
        raise DomainError(f"brute force handles 3 <= n <= {BRUTE_FORCE_MAX_N}, got n={n}")
    c = instance.cost.tolist()
    best, best_tour = float("inf"), None
    for perm in itertools.permutations(range(1, n)):
        total = c[0][perm[0]]
        prev = perm[0]
        for city in perm[1:]:
            total += c[prev][city]
            prev = city
        total += c[prev][0]
        if total < best:
            best, best_tour = total, perm
    return best, best_tour


def held_karp_opt(instance: TspInstance) -> Tuple[float, Tuple[int, ...]]:
    """Bellman-Held-Karp subset DP.

    ``dp[S, j]`` is the cheapest path leaving the depot, visiting exactly the
    cities in bitmask ``S`` (bit ``c - 1`` for city ``c``) and ending at city
    ``j + 1``. Predecessors are the first minimiser (smallest city).
    """
    n = instance.n
    if not 3 <= n <= HELD_KARP_MAX_N:
        raise DomainError(f"Held-Karp handles 3 <= n <= {HELD_KARP_MAX_N}, got n={n}")
    m = n - 1
    C = instance.cost[1:, 1:]
    full = (1 << m) - 1
    dp = np.full((1 << m, m), np.inf)
    pred = np.full((1 << m, m), -1, dtype=np.int8)
    for j in range(m):
        dp[1 << j, j] = instance.cost[0, j + 1]
    bits = np.arange(m)
    for mask in range(1, full + 1):
        members = bits[(mask >> bits) & 1 == 1]
        if members.size < 2:
            continue
        prev_masks = mask ^ (1 << members)
        # cand[a, b]: arrive at members[a] from city b
        cand = dp[prev_masks] + C[:, members].T
        arg = np.argmin(cand, axis=1)
        dp[mask, members] = cand[np.arange(members.size), arg]
        pred[mask, members] = arg
    closing = dp[full] + instance.cost[1:, 0]
    last = int(np.argmin(closing))
    best = float(closing[last])
    tour = []
    mask, j = full, last
    while j >= 0:
        tour.append(j + 1)
        i = int(pred[mask, j])
        mask ^= 1 << j
        j = i
    return best, tuple(reversed(tour))


def mtz_names(n: int):
    x = [(i, j) for i in range(n) for j in range(n) if i != j]
    return [f"xm_{i}_{j}" for i, j in x], [f"u_{i}" for i in range(1, n)]


def render_mtz(instance: TspInstance) -> str:
    """MTZ integer program as free MPS.

    Binary ``xm_i_j`` for every ordered pair, order variables ``1 <= u_i <= n-1``
    for cities ``1..n-1``, out/in assignment rows and
    ``u_i - u_j + (n-1) xm_i_j <= n-2`` for ``i != j`` in ``1..n-1``.
    """
    import scipy.sparse as sp

    n = instance.n
    if n < 3:
        raise DomainError(f"MTZ export needs n >= 3, got n={n}")
    arcs = [(i, j) for i in range(n) for j in range(n) if i != j]
    x_names, u_names = mtz_names(n)
    mtz_pairs = [(i, j) for i in range(1, n) for j in range(1, n) if i != j]
    row_names = [f"out_{i}" for i in range(n)] + [f"in_{j}" for j in range(n)] + [f"mtz_{i}_{j}" for i, j in mtz_pairs]
    senses = ["E"] * (2 * n) + ["L"] * len(mtz_pairs)
    rhs = np.array([1.0] * (2 * n) + [float(n - 2)] * len(mtz_pairs))
    mtz_row = {p: 2 * n + k for k, p in enumerate(mtz_pairs)}
    rows, cols, vals = [], [], []
    for col, (i, j) in enumerate(arcs):
        rows += [i, n + j]
        cols += [col, col]
        vals += [1.0, 1.0]
        if i >= 1 and j >= 1:
            rows.append(mtz_row[(i, j)])
            cols.append(col)
            vals.append(float(n - 1))
    for (i, j), r in mtz_row.items():
        rows += [r, r]
        cols += [len(arcs) + i - 1, len(arcs) + j - 1]
        vals += [1.0, -1.0]
    n_cols = len(arcs) + n - 1
    A = sp.coo_matrix((vals, (rows, cols)), shape=(len(row_names), n_cols))
    objective = np.zeros(n_cols)
    for col, (i, j) in enumerate(arcs):
        objective[col] = instance.cost[i, j]
    integer = np.zeros(n_cols, dtype=bool)
    integer[: len(arcs)] = True
    bounds = [("BV", name, None) for name in x_names]
    for name in u_names:
        bounds += [("LO", name, 1.0), ("UP", name, float(n - 1))]
    return render_mps(f"MTZ_N{n}", row_names, senses, A, objective, x_names + u_names, rhs,
                      integer_cols=integer, bounds=bounds)


def write_mtz(instance: TspInstance, path) -> None:
    _write_text(path, render_mtz(instance))
