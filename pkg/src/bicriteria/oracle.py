"""Exhaustive ground truth: optimum, class checks and bicriteria frontiers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .constraints import (
    BaseConstraint,
    Cardinality,
    Knapsack,
    Matroid,
    PartitionMatroid,
    Region,
    UniformMatroid,
    feasible_masks,
    infeasibility_ratio,
    subset_sums,
)
from .core import SetFunction, all_masks, members, popcount, popcounts, to_set

BRUTE_N = 22
VERIFY_N = 12
MATROID_N = 10
FRONTIER_N = 18


@dataclass
class Verdict:
    ok: bool
    witness: Any = None

    def __bool__(self) -> bool:
        return self.ok


def _need(n: int, limit: int) -> None:
    if n > limit:
        raise ValueError(f"exhaustive check limited to n <= {limit} (got {n})")


def _lex_smallest(masks: np.ndarray) -> int:
    """Mask whose sorted element tuple is lexicographically smallest."""
    cur = np.asarray(masks, dtype=np.int64)
    prefix = 0
    while True:
        if np.any(cur == prefix):
            return prefix
        rest = cur ^ prefix
        low = rest & -rest
        bit = int(low.min())
        cur = cur[low == bit]
        prefix |= bit


def brute_opt(f: SetFunction, constraint=None) -> tuple[frozenset[int], float]:
    """Best feasible set; ties go to the lexicographically smallest sorted
    element tuple."""
    _need(f.n, BRUTE_N)
    vals = f.table()
    ok = feasible_masks(constraint, f.n)
    if not ok.any():
        raise ValueError("no feasible set")
    best = float(vals[ok].max())
    ties = np.flatnonzero(ok & (vals == best))
    return to_set(_lex_smallest(ties)), best


def verify_submodular(f: SetFunction, tol: float = 1e-9) -> Verdict:
    """Witness (S, T, u) with S subset of T and f(u|S) < f(u|T)."""
    _need(f.n, VERIFY_N)
    vals = f.table()
    masks = all_masks(f.n)
    for v in range(f.n):
        for u in range(f.n):
            if u == v:
                continue
            bu, bv = 1 << u, 1 << v
            base = masks[(masks & (bu | bv)) == 0]
            gap = (vals[base | bu] - vals[base]) - (vals[base | bu | bv] - vals[base | bv])
            bad = np.flatnonzero(gap < -tol)
            if len(bad):
                S = int(base[bad[0]])
                return Verdict(False, (to_set(S), to_set(S | bv), u))
    return Verdict(True)


def verify_monotone(f: SetFunction, tol: float = 1e-9) -> Verdict:
    _need(f.n, VERIFY_N)
    vals = f.table()
    masks = all_masks(f.n)
    for u in range(f.n):
        base = masks[(masks >> u) & 1 == 0]
        bad = np.flatnonzero(vals[base | (1 << u)] < vals[base] - tol)
        if len(bad):
            return Verdict(False, (to_set(int(base[bad[0]])), u))
    return Verdict(True)


def verify_symmetric(f: SetFunction, tol: float = 1e-9) -> Verdict:
    _need(f.n, VERIFY_N)
    vals = f.table()
    masks = all_masks(f.n)
    comp = masks ^ ((1 << f.n) - 1)
    bad = np.flatnonzero(np.abs(vals - vals[comp]) > tol)
    if len(bad):
        return Verdict(False, to_set(int(masks[bad[0]])))
    return Verdict(True)


def verify_nonnegative(f: SetFunction) -> Verdict:
    _need(f.n, VERIFY_N)
    vals = f.table()
    bad = np.flatnonzero(vals < 0)
    return Verdict(not len(bad), to_set(int(bad[0])) if len(bad) else None)


def verify_matroid(m: Matroid) -> Verdict:
    """Checks the empty set, down-closure and single-step exchange."""
    _need(m.n, MATROID_N)
    masks = all_masks(m.n)
    ind = m.independent_masks(masks)
    if not ind[0]:
        return Verdict(False, ("empty", frozenset()))
    for u in range(m.n):
        with_u = masks[(ind) & (((masks >> u) & 1) == 1)]
        drop = with_u & ~np.int64(1 << u)
        bad = np.flatnonzero(~ind[drop])
        if len(bad):
            return Verdict(False, ("down-closed", to_set(int(with_u[bad[0]])), u))
    indep = [int(s) for s in masks[ind]]
    by_size: dict[int, list[int]] = {}
    for s in indep:
        by_size.setdefault(popcount(s), []).append(s)
    for size, small in by_size.items():
        for S in small:
            for T in by_size.get(size + 1, []):
                if not any(ind[S | (1 << u)] for u in members(T & ~S)):
                    return Verdict(False, ("exchange", to_set(S), to_set(T)))
    return Verdict(True)


def _all_ratios(constraint, n: int) -> np.ndarray:
    masks = all_masks(n)
    if isinstance(constraint, Cardinality):
        return popcounts(masks) / constraint.k if constraint.k else np.where(masks == 0, 0.0, math.inf)
    if isinstance(constraint, Knapsack):
        return subset_sums(constraint.prices) / constraint.budget
    m = constraint.matroid if isinstance(constraint, BaseConstraint) else constraint
    if isinstance(m, UniformMatroid):
        return np.ceil(popcounts(masks) / m.k) if m.k else np.where(masks == 0, 0.0, math.inf)
    if isinstance(m, PartitionMatroid):
        out = np.where((masks & m.free) != 0, math.inf, 0.0)
        for pm, lim in zip(m.part_masks, m.limits):
            cnt = popcounts(masks & pm)
            part = np.ceil(cnt / lim) if lim else np.where(cnt == 0, 0.0, math.inf)
            out = np.maximum(out, part)
        return out
    out = np.empty(len(masks))
    for i in range(len(masks)):
        try:
            r = infeasibility_ratio(int(masks[i]), constraint)
        except ValueError:
            r = math.inf
        out[i] = math.inf if r is None else r
    return out


def brute_bicriteria_frontier(f: SetFunction, constraint, beta_grid: Sequence[float]) -> list[tuple[float, float]]:
    """Best value among sets with infeasibility ratio at most beta, per beta."""
    _need(f.n, FRONTIER_N)
    if isinstance(constraint, (BaseConstraint, Region)):
        raise TypeError("frontier needs a down-closed set constraint")
    vals = f.table()
    ratios = _all_ratios(constraint, f.n)
    out = []
    for beta in beta_grid:
        ok = ratios <= beta + 1e-9
        out.append((float(beta), float(vals[ok].max()) if ok.any() else -math.inf))
    return out
