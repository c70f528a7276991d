"""Constraints, linear maximization over polytopes, matroid union, and the
closed-form guarantee curves.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Callable, Sequence

import numpy as np

from .core import SetLike, all_masks, full_mask, members, popcount, popcounts, to_mask

# ---------------------------------------------------------------- set constraints


class Cardinality:
    def __init__(self, n: int, k: int):
        if k < 0:
            raise ValueError("cardinality budget must be nonnegative")
        self.n = n
        self.k = k

    @property
    def prices(self) -> np.ndarray:
        return np.ones(self.n)

    @property
    def budget(self) -> float:
        return float(self.k)

    def feasible(self, S: SetLike) -> bool:
        return popcount(to_mask(S)) <= self.k

    def __repr__(self) -> str:
        return f"Cardinality(n={self.n}, k={self.k})"


class Knapsack:
    """Prices p and budget B.  Every price must fit in the budget unless
    ``allow_oversize`` is set (needed by the equality post-process)."""

    def __init__(self, prices: Sequence[float], budget: float, *, allow_oversize: bool = False):
        p = np.asarray(prices, dtype=float)
        if p.ndim != 1:
            raise ValueError("prices must be a vector")
        if np.any(p < 0) or budget < 0:
            raise ValueError("prices and budget must be nonnegative")
        if not allow_oversize and np.any(p > budget):
            raise ValueError("an element costs more than the budget")
        self.prices = p
        self.prices.setflags(write=False)
        self.budget = float(budget)
        self.allow_oversize = allow_oversize

    @property
    def n(self) -> int:
        return len(self.prices)

    def cost(self, S: SetLike) -> float:
        return float(sum(self.prices[u] for u in members(to_mask(S))))

    def feasible(self, S: SetLike, tol: float = 1e-9) -> bool:
        return self.cost(S) <= self.budget + tol

    def __repr__(self) -> str:
        return f"Knapsack(prices={self.prices.tolist()}, budget={self.budget})"


def as_knapsack(con) -> Knapsack:
    if isinstance(con, Knapsack):
        return con
    if isinstance(con, Cardinality):
        return Knapsack(np.ones(con.n), con.k, allow_oversize=True)
    raise TypeError(f"expected a knapsack or cardinality constraint, got {type(con).__name__}")


def density(k) -> float:
    """c = B / ||p||_1."""
    k = as_knapsack(k)
    total = float(k.prices.sum())
    if total <= 0:
        raise ValueError("density undefined for zero total price")
    return k.budget / total


# ---------------------------------------------------------------- matroids


class Matroid:
    n: int

    def is_independent(self, S: SetLike) -> bool:
        raise NotImplementedError

    def independent_masks(self, masks: np.ndarray) -> np.ndarray:
        return np.array([self.is_independent(int(m)) for m in masks], dtype=bool)

    def rank(self, S: SetLike | None = None) -> int:
        mask = full_mask(self.n) if S is None else to_mask(S)
        basis = 0
        for u in members(mask):
            if self.is_independent(basis | (1 << u)):
                basis |= 1 << u
        return popcount(basis)

    def union_closed_form(self, k: int) -> "Matroid | None":
        """The k-fold union as a builtin matroid, when one exists."""
        return None


class UniformMatroid(Matroid):
    def __init__(self, n: int, k: int):
        self.n, self.k = n, k

    def is_independent(self, S):
        mask = to_mask(S)
        return mask >> self.n == 0 and popcount(mask) <= self.k

    def independent_masks(self, masks):
        return popcounts(masks) <= self.k

    def rank(self, S=None):
        mask = full_mask(self.n) if S is None else to_mask(S)
        return min(popcount(mask), self.k)

    def union_closed_form(self, k):
        return UniformMatroid(self.n, min(self.n, self.k * k))

    def __repr__(self):
        return f"UniformMatroid(n={self.n}, k={self.k})"


class PartitionMatroid(Matroid):
    def __init__(self, n: int, parts: Sequence[Sequence[int]], limits: Sequence[int]):
        if len(parts) != len(limits):
            raise ValueError("one limit per part")
        self.n = n
        self.parts = [tuple(p) for p in parts]
        self.limits = [int(l) for l in limits]
        self.part_masks = [to_mask(p) for p in self.parts]
        covered = 0
        for pm in self.part_masks:
            if covered & pm:
                raise ValueError("parts must be disjoint")
            covered |= pm
        # elements in no part are loops
        self.free = full_mask(n) & ~covered

    def is_independent(self, S):
        mask = to_mask(S)
        if mask & self.free or mask >> self.n:
            return False
        return all(popcount(mask & pm) <= lim for pm, lim in zip(self.part_masks, self.limits))

    def independent_masks(self, masks):
        ok = (masks & self.free) == 0
        for pm, lim in zip(self.part_masks, self.limits):
            ok &= popcounts(masks & pm) <= lim
        return ok

    def rank(self, S=None):
        mask = full_mask(self.n) if S is None else to_mask(S)
        return sum(min(popcount(mask & pm), lim) for pm, lim in zip(self.part_masks, self.limits))

    def union_closed_form(self, k):
        return PartitionMatroid(self.n, self.parts, [min(len(p), l * k) for p, l in zip(self.parts, self.limits)])

    def __repr__(self):
        return f"PartitionMatroid(n={self.n}, parts={self.parts}, limits={self.limits})"


class GraphicMatroid(Matroid):
    """Elements are edges; a set is independent iff it is a forest."""

    def __init__(self, n_vertices: int, edges: Sequence[tuple[int, int]]):
        self.n_vertices = n_vertices
        self.edges = [(int(a), int(b)) for a, b in edges]
        self.n = len(self.edges)

    def is_independent(self, S):
        parent = list(range(self.n_vertices))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for e in members(to_mask(S)):
            if e >= self.n:
                return False
            a, b = find(self.edges[e][0]), find(self.edges[e][1])
            if a == b:
                return False
            parent[a] = b
        return True

    def __repr__(self):
        return f"GraphicMatroid(n_vertices={self.n_vertices}, edges={self.edges})"


class OracleMatroid(Matroid):
    def __init__(self, n: int, independent: Callable[[frozenset[int]], bool], rank_hint: int | None = None):
        self.n = n
        self._fn = independent
        self.rank_hint = rank_hint

    def is_independent(self, S):
        mask = to_mask(S)
        if mask >> self.n:
            return False
        return bool(self._fn(frozenset(members(mask))))


class DummyExtendedMatroid(Matroid):
    """Original matroid plus ``count`` dummies: S is independent iff its
    original part is independent and |S| is at most the original rank."""

    def __init__(self, base: Matroid, count: int):
        self.base = base
        self.count = count
        self.n = base.n + count
        self.base_rank = base.rank()
        self._keep = full_mask(base.n)

    def is_independent(self, S):
        mask = to_mask(S)
        if mask >> self.n:
            return False
        return popcount(mask) <= self.base_rank and self.base.is_independent(mask & self._keep)

    def independent_masks(self, masks):
        return (popcounts(masks) <= self.base_rank) & self.base.independent_masks(masks & self._keep)


class UnionMatroid(Matroid):
    """k-fold union: sets that split into k independent sets of ``base``."""

    def __init__(self, base: Matroid, k: int):
        self.base, self.k, self.n = base, k, base.n

    def is_independent(self, S):
        return matroid_union_independent(self.base, self.k, S)


def union_matroid(m: Matroid, k: int) -> Matroid:
    if k < 1:
        raise ValueError("union multiplicity must be at least 1")
    if k == 1:
        return m
    closed = m.union_closed_form(k)
    return closed if closed is not None else UnionMatroid(m, k)


class BaseConstraint:
    """Feasible sets are the bases of a matroid (not down-closed)."""

    def __init__(self, matroid: Matroid):
        self.matroid = matroid
        self.n = matroid.n
        self.r = matroid.rank()

    def feasible(self, S):
        mask = to_mask(S)
        return popcount(mask) == self.r and self.matroid.is_independent(mask)


def _partition_into(m: Matroid, k: int, elements: Sequence[int]) -> list[int] | None:
    """Edmonds-style matroid partition by shortest augmenting paths."""
    sets = [0] * k
    owner: dict[int, int] = {}
    for s in elements:
        parent: dict[int, tuple[int, int] | None] = {s: None}
        queue = deque([s])
        found: tuple[int, int] | None = None
        while queue and found is None:
            e = queue.popleft()
            bit = 1 << e
            for j in range(k):
                if owner.get(e) == j:
                    continue
                if m.is_independent(sets[j] | bit):
                    found = (e, j)
                    break
                for t in members(sets[j]):
                    if t in parent:
                        continue
                    if m.is_independent((sets[j] & ~(1 << t)) | bit):
                        parent[t] = (e, j)
                        queue.append(t)
        if found is None:
            return None
        e, j = found
        while True:
            if e in owner:
                sets[owner[e]] &= ~(1 << e)
            sets[j] |= 1 << e
            owner[e] = j
            step = parent[e]
            if step is None:
                break
            # e left its old set j2; the element that displaced it moves in
            prev, j2 = step
            e, j = prev, j2
    return sets


def matroid_union_independent(m: Matroid, k: int, S: SetLike) -> bool:
    """True iff S splits into at most k independent sets of m."""
    if k < 1:
        raise ValueError("k must be at least 1")
    mask = to_mask(S)
    closed = m.union_closed_form(k)
    if closed is not None:
        return closed.is_independent(mask)
    if k == 1:
        return m.is_independent(mask)
    return _partition_into(m, k, members(mask)) is not None


def partition_into_independent(m: Matroid, k: int, S: SetLike) -> list[frozenset[int]] | None:
    sets = _partition_into(m, k, members(to_mask(S)))
    if sets is None:
        return None
    return [frozenset(members(s)) for s in sets]


def union_rank_table(m: Matroid, k: int) -> np.ndarray:
    """Rank of the k-fold union matroid on every subset (n <= 20)."""
    if m.n > 20:
        raise ValueError("rank tables are limited to n <= 20")
    u = union_matroid(m, k)
    masks = all_masks(m.n)
    if isinstance(u, UniformMatroid):
        return np.minimum(popcounts(masks), u.k)
    if isinstance(u, PartitionMatroid):
        r = np.zeros(len(masks), dtype=np.int64)
        for pm, lim in zip(u.part_masks, u.limits):
            r += np.minimum(popcounts(masks & pm), lim)
        return r
    # basis[S] extends basis[S - top] by top when still independent
    ranks = np.zeros(len(masks), dtype=np.int64)
    basis = [0] * len(masks)
    for mask in range(1, len(masks)):
        top = mask.bit_length() - 1
        rest = mask & ~(1 << top)
        cand = basis[rest] | (1 << top)
        if u.is_independent(cand):
            basis[mask] = cand
            ranks[mask] = ranks[rest] + 1
        else:
            basis[mask] = basis[rest]
            ranks[mask] = ranks[rest]
    return ranks


# ---------------------------------------------------------------- regions


class Region:
    n: int
    down_closed: bool = True

    def lp_maximize(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool | None:
        """Membership test; None when the region cannot check membership."""
        return None

    def scaled(self, t: float) -> "Region":
        """{x in [0,1]^N : x/t in self}."""
        raise NotImplementedError


def _in_box(x: np.ndarray, tol: float) -> bool:
    return bool(np.all(x >= -tol) and np.all(x <= 1 + tol))


class BoxRegion(Region):
    def __init__(self, n: int):
        self.n = n

    def lp_maximize(self, w):
        return (np.asarray(w) > 0).astype(float)

    def contains(self, x, tol=1e-9):
        return _in_box(np.asarray(x), tol)

    def scaled(self, t):
        return self


class KnapsackPolytope(Region):
    def __init__(self, prices: Sequence[float], budget: float):
        self.prices = np.asarray(prices, dtype=float)
        self.budget = float(budget)
        self.n = len(self.prices)

    def lp_maximize(self, w):
        w = np.asarray(w, dtype=float)
        x = np.zeros(self.n)
        pos = np.flatnonzero(w > 0)
        free = pos[self.prices[pos] == 0]
        x[free] = 1.0
        paid = pos[self.prices[pos] > 0]
        ratio = w[paid] / self.prices[paid]
        order = paid[np.argsort(-ratio, kind="stable")]
        left = self.budget
        for u in order:
            if left <= 0:
                break
            take = min(1.0, left / self.prices[u])
            x[u] = take
            left -= take * self.prices[u]
        return x

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return _in_box(x, tol) and float(self.prices @ x) <= self.budget + tol

    def scaled(self, t):
        return KnapsackPolytope(self.prices, self.budget * t)


def cardinality_polytope(n: int, k: float) -> KnapsackPolytope:
    return KnapsackPolytope(np.ones(n), k)


class MatroidPolytope(Region):
    def __init__(self, matroid: Matroid):
        self.matroid = matroid
        self.n = matroid.n
        self._ranks: np.ndarray | None = None

    def lp_maximize(self, w):
        w = np.asarray(w, dtype=float)
        order = np.argsort(-w, kind="stable")
        x = np.zeros(self.n)
        basis = 0
        for u in order:
            if w[u] <= 0:
                break
            if self.matroid.is_independent(basis | (1 << int(u))):
                basis |= 1 << int(u)
                x[u] = 1.0
        return x

    def _rank_table(self) -> np.ndarray:
        if self._ranks is None:
            self._ranks = union_rank_table(self.matroid, 1)
        return self._ranks

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        if not _in_box(x, tol):
            return False
        m = self.matroid
        if isinstance(m, UniformMatroid):
            return float(x.sum()) <= m.k + tol
        if isinstance(m, PartitionMatroid):
            if np.any(x[list(members(m.free))] > tol):
                return False
            return all(float(x[list(p)].sum()) <= lim + tol for p, lim in zip(m.parts, m.limits))
        if self.n > 16:
            return None
        return bool(np.all(subset_sums(x) <= self._rank_table() + tol))

    def scaled(self, t):
        k = int(round(t))
        if abs(k - t) > 1e-12 or k < 1:
            raise ValueError("matroid polytopes scale by positive integers only")
        return MatroidPolytope(union_matroid(self.matroid, k))


class MatroidBasePolytope(Region):
    """Convex hull of the bases; not down-closed."""

    down_closed = False

    def __init__(self, matroid: Matroid):
        self.matroid = matroid
        self.n = matroid.n
        self.poly = MatroidPolytope(matroid)
        self.r = matroid.rank()

    def lp_maximize(self, w):
        w = np.asarray(w, dtype=float)
        order = np.argsort(-w, kind="stable")
        x = np.zeros(self.n)
        basis = 0
        for u in order:
            if self.matroid.is_independent(basis | (1 << int(u))):
                basis |= 1 << int(u)
                x[u] = 1.0
        return x

    def contains(self, x, tol=1e-9):
        inside = self.poly.contains(x, tol)
        if inside is None:
            return None
        return inside and abs(float(np.sum(x)) - self.r) <= tol * max(1, self.n)


class OracleRegion(Region):
    def __init__(self, n: int, lp: Callable[[np.ndarray], np.ndarray], *, down_closed: bool = True,
                 membership: Callable[[np.ndarray], bool] | None = None):
        self.n = n
        self._lp = lp
        self.down_closed = down_closed
        self._membership = membership

    def lp_maximize(self, w):
        return np.asarray(self._lp(np.asarray(w, dtype=float)), dtype=float)

    def contains(self, x, tol=1e-9):
        if self._membership is None:
            return None
        return bool(self._membership(np.asarray(x, dtype=float)))


def subset_sums(x: np.ndarray) -> np.ndarray:
    """x(S) for every bitset S."""
    sums = np.zeros(1, dtype=float)
    for xu in np.asarray(x, dtype=float):
        sums = np.concatenate([sums, sums + xu])
    return sums


def as_region(con) -> Region:
    if isinstance(con, Region):
        return con
    if isinstance(con, Cardinality):
        return cardinality_polytope(con.n, con.k)
    if isinstance(con, Knapsack):
        return KnapsackPolytope(con.prices, con.budget)
    if isinstance(con, Matroid):
        return MatroidPolytope(con)
    if isinstance(con, BaseConstraint):
        return MatroidBasePolytope(con.matroid)
    raise TypeError(f"no polytope for constraint {type(con).__name__}")


def lp_maximize(region: Region, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    return region.lp_maximize(w)


def is_feasible(con, S: SetLike) -> bool:
    mask = to_mask(S)
    if con is None:
        return True
    if isinstance(con, Matroid):
        return con.is_independent(mask)
    if isinstance(con, Region):
        from .core import indicator

        ok = con.contains(indicator(mask, con.n))
        if ok is None:
            raise ValueError("region cannot certify membership")
        return ok
    return con.feasible(mask)


def feasible_masks(con, n: int) -> np.ndarray:
    """Boolean feasibility of every bitset over n elements."""
    masks = all_masks(n)
    if con is None:
        return np.ones(len(masks), dtype=bool)
    if isinstance(con, Cardinality):
        return popcounts(masks) <= con.k
    if isinstance(con, Knapsack):
        return subset_sums(con.prices) <= con.budget + 1e-9
    if isinstance(con, Matroid):
        return con.independent_masks(masks)
    if isinstance(con, BaseConstraint):
        return con.matroid.independent_masks(masks) & (popcounts(masks) == con.r)
    if isinstance(con, Region):
        from .core import indicator

        out = np.zeros(len(masks), dtype=bool)
        for m in range(len(masks)):
            ok = con.contains(indicator(m, n))
            if ok is None:
                raise ValueError("region cannot certify membership")
            out[m] = ok
        return out
    raise TypeError(f"unknown constraint {type(con).__name__}")


# ---------------------------------------------------------------- infeasibility


def _matroid_ratio(m: Matroid, mask: int) -> int:
    if mask == 0:
        return 0
    for u in members(mask):
        if not m.is_independent(1 << u):
            raise ValueError(f"element {u} is a loop; no union of independent sets covers it")
    lo, hi = 1, popcount(mask)
    while lo < hi:
        mid = (lo + hi) // 2
        if matroid_union_independent(m, mid, mask):
            hi = mid
        else:
            lo = mid + 1
    return lo


def infeasibility_ratio(solution, con) -> float | None:
    """Achieved beta: cost/B, |S|/k, number of independent sets, or the
    smallest scale t with x/t in the region.  None if uncertifiable."""
    if isinstance(solution, np.ndarray) and solution.dtype.kind == "f":
        return _fractional_ratio(solution, as_region(con))
    mask = to_mask(solution)
    if isinstance(con, Cardinality):
        if con.k == 0:
            return 0.0 if mask == 0 else math.inf
        return popcount(mask) / con.k
    if isinstance(con, Knapsack):
        cost = con.cost(mask)
        if con.budget == 0:
            return 0.0 if cost == 0 else math.inf
        return cost / con.budget
    if isinstance(con, Matroid):
        return float(_matroid_ratio(con, mask))
    if isinstance(con, BaseConstraint):
        return float(_matroid_ratio(con.matroid, mask))
    from .core import indicator

    return _fractional_ratio(indicator(mask, con.n), as_region(con))


def _fractional_ratio(x: np.ndarray, region: Region, tol: float = 1e-6) -> float | None:
    x = np.asarray(x, dtype=float)
    if np.all(x <= 0):
        return 0.0
    probe = region.contains(x)
    if probe is None:
        return None
    hi = max(1.0, float(x.max()))
    while not region.contains(x / hi):
        hi *= 2
        if hi > 2.0**60:
            raise ValueError("unbounded: support lies outside the region")
    lo = 0.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if mid > 0 and region.contains(x / mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------- closed forms


def rho_low(c: float, eps: float) -> float:
    return (1 - eps**c) / c


def rho_high(c: float, eps: float) -> float:
    return (1 - 2 * (1 - c) * math.sqrt(eps) - eps * (2 * c - 1)) / c


def rho(c: float, eps: float) -> float:
    """Budget multiplier of the fractional knapsack guarantee at density c."""
    if not 0 < c < 1 or not 0 < eps <= 1:
        raise ValueError("rho needs c in (0,1) and eps in (0,1]")
    return rho_low(c, eps) if c <= 0.5 else rho_high(c, eps)


NU_KNEE = 2 * math.log(2)


def nu(beta: float) -> float:
    """Best achievable value fraction at infeasibility beta (general case)."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta <= NU_KNEE:
        h = math.exp(-beta / 2)
        return 2 * h * (1 - h)
    return 0.5
