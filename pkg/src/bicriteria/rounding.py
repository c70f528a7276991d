"""Dependent rounding of fractional points to sets.

Both rounders move mass along directions on which the multilinear extension
of a submodular function is convex (e_u - e_v) or linear (e_u), choosing the
direction at random so the point is preserved in expectation.  Hence
E[f(S)] >= F(x).
"""

from __future__ import annotations

import math

import numpy as np

from .constraints import Matroid, as_knapsack, subset_sums, union_rank_table
from .core import to_set

SNAP = 1e-12
TIGHT = 1e-9


def _snap(x: np.ndarray) -> np.ndarray:
    x = np.where(np.abs(x) <= SNAP, 0.0, x)
    return np.where(np.abs(x - 1) <= SNAP, 1.0, x)


def _fractional(x: np.ndarray) -> np.ndarray:
    return np.flatnonzero((x > 0) & (x < 1))


def pipage_knapsack(x, k, f=None, seed: int = 0, *, trace: list | None = None) -> frozenset[int]:
    """Round x to S with cost(S) <= <p, x> + B and E[f(S)] >= F(x).

    ``f`` is accepted for symmetry with the analysis; the walk itself never
    queries it.  When ``trace`` is a list, the integral-coordinate count is
    appended after every step.
    """
    k = as_knapsack(k)
    p = k.prices
    x = _snap(np.clip(np.asarray(x, dtype=float), 0.0, 1.0))
    rng = np.random.default_rng(seed)

    def note():
        if trace is not None:
            trace.append(int(np.sum((x == 0) | (x == 1))))

    for u in _fractional(x):
        if p[u] == 0:
            x[u] = 1.0 if rng.random() < x[u] else 0.0
            note()
    while True:
        frac = _fractional(x)
        if len(frac) < 2:
            break
        u, v = int(frac[0]), int(frac[1])
        s_u = min(1 - x[u], p[v] * x[v] / p[u])
        s_v = min(1 - x[v], p[u] * x[u] / p[v])
        if rng.random() < p[v] * s_v / (p[v] * s_v + p[u] * s_u):
            x[u] += s_u
            x[v] -= p[u] * s_u / p[v]
        else:
            x[v] += s_v
            x[u] -= p[v] * s_v / p[u]
        x = _snap(x)
        # one of the two coordinates is integral up to rounding error
        for w in (u, v):
            if 0 < x[w] < 1 and min(x[w], 1 - x[w]) < 1e-9:
                x[w] = float(round(x[w]))
        note()
    for u in _fractional(x):
        x[u] = 1.0 if rng.random() < x[u] else 0.0
        note()
    return frozenset(int(u) for u in np.flatnonzero(x == 1))


def pipage_matroid(x, beta: float, m: Matroid, f=None, seed: int = 0, *, trace: list | None = None) -> frozenset[int]:
    """Round x (with x/beta in the matroid polytope) to a set that splits into
    ceil(beta) independent sets, with E[f(S)] >= F(x).

    Works in the polytope of the ceil(beta)-fold union matroid using its full
    rank table, so it is limited to n <= 20.
    """
    x = _snap(np.clip(np.asarray(x, dtype=float), 0.0, 1.0))
    n = len(x)
    if n != m.n:
        raise ValueError("x and matroid disagree on the ground set")
    kfold = max(1, math.ceil(beta - 1e-12))
    ranks = union_rank_table(m, kfold).astype(float)
    masks = np.arange(1 << n, dtype=np.int64)
    slack = ranks - subset_sums(x)
    if np.any(slack < -1e-7):
        raise ValueError("x/beta lies outside the matroid polytope")
    has = [((masks >> u) & 1).astype(bool) for u in range(n)]
    rng = np.random.default_rng(seed)

    def note(kind):
        if trace is not None:
            trace.append((kind, int(np.sum((x == 0) | (x == 1)))))

    while True:
        frac = [int(u) for u in _fractional(x)]
        if not frac:
            break
        slack = ranks - subset_sums(x)
        tight = slack <= TIGHT
        # smallest tight set containing each fractional coordinate
        best_u, best_T = None, None
        for u in frac:
            cand = tight & has[u]
            if not cand.any():
                up = min(1 - x[u], float(slack[has[u]].min()))
                down = x[u]
                if rng.random() < down / (up + down):
                    x[u] += up
                else:
                    x[u] -= down
                best_u = -1
                break
            T = int(np.bitwise_and.reduce(masks[cand]))
            if best_T is None or bin(T).count("1") < bin(best_T).count("1"):
                best_u, best_T = u, T
        if best_u == -1:
            x = _snap(x)
            note("single")
            continue
        u = best_u
        v = next(w for w in frac if w != u and (best_T >> w) & 1)
        only_u = has[u] & ~has[v]
        only_v = has[v] & ~has[u]
        up = min(1 - x[u], x[v], float(slack[only_u].min()) if only_u.any() else math.inf)
        down = min(x[u], 1 - x[v], float(slack[only_v].min()) if only_v.any() else math.inf)
        if up <= 0 or down <= 0:
            raise RuntimeError("pipage step blocked; point is not in the polytope")
        if rng.random() < down / (up + down):
            x[u] += up
            x[v] -= up
        else:
            x[u] -= down
            x[v] += down
        x = _snap(x)
        note("pair")
    return to_set(sum(1 << int(u) for u in np.flatnonzero(x == 1)))
