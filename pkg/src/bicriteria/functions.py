"""Submodular function families, including the hard-instance constructions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .constraints import BaseConstraint, Cardinality, PartitionMatroid
from .core import SetFunction, members, popcount, popcounts, to_mask

_DOMAIN_TOL = 1e-12


# ---------------------------------------------------------------- closed forms


def _check_domain(c: float, x: float, y: float) -> None:
    if not 0 < c < 1:
        raise ValueError("c must lie in (0,1)")
    if not (-_DOMAIN_TOL <= x <= c + _DOMAIN_TOL and -_DOMAIN_TOL <= y <= 1 - c + _DOMAIN_TOL):
        raise ValueError(f"({x}, {y}) outside [0,{c}]x[0,{1 - c}]")


def eval_G(c: float, x: float, y: float) -> float:
    """G(x, y) = 1 - (1 - x - y)^(1/c)."""
    _check_domain(c, x, y)
    return 1 - max(0.0, 1 - (x + y)) ** (1 / c)


def eval_F_hard(c: float, delta_p: float, x: float, y: float) -> float:
    """Perturbed version of G that hides the optimal set once few of its
    elements have been picked."""
    _check_domain(c, x, y)
    if not 0 < delta_p < c / 4:
        raise ValueError("delta' must lie in (0, c/4)")
    if y >= (1 - delta_p) * (1 - c):
        return eval_G(c, x, y)
    boost = max(0.0, (x - c / (1 - c) * y - delta_p) / (c * (1 - y / (1 - c) - delta_p)))
    mass = min(x + y, y / (1 - c) + delta_p)
    return 1 - (1 - boost) * max(0.0, 1 - mass) ** (1 / c)


# ---------------------------------------------------------------- families


def _bit_counts(masks: np.ndarray, sel: int) -> np.ndarray:
    return popcounts(np.asarray(masks, dtype=np.int64) & sel)


@dataclass(frozen=True)
class Modular:
    weights: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.weights)

    def build(self, seed: int = 0):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("modular weights must be nonnegative")

        def value(mask):
            return float(sum(w[u] for u in members(mask)))

        def batch(masks):
            out = np.zeros(len(masks))
            for u in range(len(w)):
                out += ((masks >> u) & 1) * w[u]
            return out

        return SetFunction(self.n, value, batch_fn=batch, monotone=True, name="modular"), None


@dataclass(frozen=True)
class Coverage:
    """Weighted coverage: element u covers the items in element_covers[u]."""

    universe_weights: tuple[float, ...]
    element_covers: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.element_covers)

    def build(self, seed: int = 0):
        w = np.asarray(self.universe_weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("item weights must be nonnegative")
        # item -> bitset of the elements covering it
        coverers = [0] * len(w)
        for u, items in enumerate(self.element_covers):
            for it in items:
                coverers[it] |= 1 << u

        def value(mask):
            return float(sum(w[i] for i, cm in enumerate(coverers) if cm & mask))

        def batch(masks):
            out = np.zeros(len(masks))
            for i, cm in enumerate(coverers):
                out += ((masks & cm) != 0) * w[i]
            return out

        return SetFunction(self.n, value, batch_fn=batch, monotone=True, name="coverage"), None


def random_coverage(n: int, items: int, seed: int, max_cover: int | None = None) -> Coverage:
    """Item weights ~ U(0,1], cover sets of random size 1..max_cover."""
    rng = np.random.default_rng(seed)
    max_cover = max_cover or max(1, items // 2)
    weights = tuple(float(1.0 - rng.random()) for _ in range(items))
    covers = []
    for _ in range(n):
        k = int(rng.integers(1, max_cover + 1))
        covers.append(tuple(sorted(int(i) for i in rng.choice(items, size=k, replace=False))))
    return Coverage(weights, tuple(covers))


@dataclass(frozen=True)
class DirectedCut:
    """Weight of arcs leaving S: sum of w over arcs (a, b) with a in S, b not."""

    n_vertices: int
    arcs: tuple[tuple[int, int, float], ...]

    @property
    def n(self) -> int:
        return self.n_vertices

    def build(self, seed: int = 0):
        arcs = [(int(a), int(b), float(w)) for a, b, w in self.arcs]
        if any(w < 0 for _, _, w in arcs):
            raise ValueError("arc weights must be nonnegative")

        def value(mask):
            return float(sum(w for a, b, w in arcs if (mask >> a) & 1 and not (mask >> b) & 1))

        def batch(masks):
            out = np.zeros(len(masks))
            for a, b, w in arcs:
                out += (((masks >> a) & 1) * (1 - ((masks >> b) & 1))) * w
            return out

        return SetFunction(self.n, value, batch_fn=batch, name="dicut"), None


@dataclass(frozen=True)
class UndirectedCut:
    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    @property
    def n(self) -> int:
        return self.n_vertices

    def build(self, seed: int = 0):
        edges = [(int(a), int(b), float(w)) for a, b, w in self.edges]
        if any(w < 0 for _, _, w in edges):
            raise ValueError("edge weights must be nonnegative")

        def value(mask):
            return float(sum(w for a, b, w in edges if ((mask >> a) ^ (mask >> b)) & 1))

        def batch(masks):
            out = np.zeros(len(masks))
            for a, b, w in edges:
                out += (((masks >> a) ^ (masks >> b)) & 1) * w
            return out

        return SetFunction(self.n, value, batch_fn=batch, symmetric=True, name="cut"), None


def random_graph(n: int, p: float, seed: int, *, directed: bool = False):
    rng = np.random.default_rng(seed)
    pairs = []
    for a in range(n):
        for b in range(n):
            if a == b or (not directed and b < a):
                continue
            if rng.random() < p:
                pairs.append((a, b, float(1.0 - rng.random())))
    cls = DirectedCut if directed else UndirectedCut
    return cls(n, tuple(pairs))


def _draw_subset(n: int, k: int, seed: int) -> tuple[int, ...]:
    rng = np.random.default_rng(seed)
    return tuple(sorted(int(u) for u in rng.choice(n, size=k, replace=False)))


@dataclass(frozen=True)
class HardMonotone:
    """f_O(S) = F(|S & O| / (i l), |S - O| / (i l)) with density c = h / l.

    ``O`` is drawn from the seed when not given.  Comes with the cardinality
    constraint i*h.
    """

    h: int
    ell: int
    i: int
    delta_p: float
    O: Optional[tuple[int, ...]] = None

    @property
    def n(self) -> int:
        return self.i * self.ell

    @property
    def c(self) -> float:
        return self.h / self.ell

    def validate(self) -> None:
        if self.h < 1 or self.ell < 1 or self.i < 1:
            raise ValueError("h, l and i must be positive")
        if Fraction(self.h, self.ell) > Fraction(1, 2):
            raise ValueError("c = h/l must be at most 1/2")
        if not 0 < self.delta_p < self.c / 4:
            raise ValueError("delta' must lie in (0, c/4)")
        if self.O is not None and len(set(self.O)) != self.i * self.h:
            raise ValueError("O must have i*h elements")

    def optimal_set(self, seed: int = 0) -> tuple[int, ...]:
        return self.O if self.O is not None else _draw_subset(self.n, self.i * self.h, seed)

    def build(self, seed: int = 0):
        self.validate()
        O_mask = to_mask(self.optimal_set(seed))
        scale = float(self.n)
        c, dp = self.c, self.delta_p

        def value(mask):
            return eval_F_hard(c, dp, popcount(mask & O_mask) / scale, popcount(mask & ~O_mask) / scale)

        # f depends only on the two counts, so tabulate them once
        grid = np.array(
            [[eval_F_hard(c, dp, a / scale, b / scale) for b in range(self.n - self.i * self.h + 1)]
             for a in range(self.i * self.h + 1)]
        )
        rest = ((1 << self.n) - 1) & ~O_mask

        def batch(masks):
            return grid[_bit_counts(masks, O_mask), _bit_counts(masks, rest)]

        f = SetFunction(self.n, value, batch_fn=batch, monotone=True, name="hard")
        return f, Cardinality(self.n, self.i * self.h)


@dataclass(frozen=True)
class HardMonotoneExtended:
    """Density c = h/l > 1/2: a density-1/2 hard instance on 2(l-h)i
    elements plus (2h-l)i linear elements worth r/((l-h)i) each."""

    h: int
    ell: int
    i: int
    delta_p: float
    r: float
    O: Optional[tuple[int, ...]] = None

    @property
    def n(self) -> int:
        return self.ell * self.i

    @property
    def inner(self) -> HardMonotone:
        return HardMonotone(1, 2, (self.ell - self.h) * self.i, self.delta_p, self.O)

    @property
    def extra(self) -> int:
        return (2 * self.h - self.ell) * self.i

    def build(self, seed: int = 0):
        if not Fraction(1, 2) < Fraction(self.h, self.ell) < 1:
            raise ValueError("the extended instance needs 1/2 < h/l < 1")
        if not 0 <= self.r <= 1:
            raise ValueError("r must lie in [0,1]")
        inner_f, _ = self.inner.build(seed)
        n_old = inner_f.n
        old = (1 << n_old) - 1
        unit = self.r / ((self.ell - self.h) * self.i)

        def value(mask):
            return inner_f.value_fn(mask & old) + unit * popcount(mask & ~old)

        def batch(masks):
            return inner_f.batch_fn(masks & old) + unit * _bit_counts(masks, ((1 << self.n) - 1) & ~old)

        f = SetFunction(self.n, value, batch_fn=batch, monotone=True, name="hard-ext")
        return f, Cardinality(self.n, self.h * self.i)


@dataclass(frozen=True)
class ArcsSymmetryGap:
    """n disjoint arcs a_i -> b_i (a_i = i, b_i = n + i), constrained to
    bases of the partition matroid |S & A| = 1, |S & B| = n - 1."""

    n_arcs: int

    @property
    def n(self) -> int:
        return 2 * self.n_arcs

    def build(self, seed: int = 0):
        k = self.n_arcs
        if k < 1:
            raise ValueError("need at least one arc")
        f, _ = DirectedCut(2 * k, tuple((i, k + i, 1.0) for i in range(k))).build()
        f.name = "arcs"
        matroid = PartitionMatroid(2 * k, [range(k), range(k, 2 * k)], [1, k - 1])
        return f, BaseConstraint(matroid)


@dataclass(frozen=True)
class KappaBlend:
    """kappa*g + (1-kappa)*h on {a, b} plus an n x n grid per side.

    Layout: a = 0, b = 1, a_ij = 2 + i*n + j, b_ij = 2 + n*n + i*n + j.
    """

    n_side: int
    kappa: float

    @property
    def n(self) -> int:
        return 2 + 2 * self.n_side**2

    def a_row(self, i: int) -> int:
        return sum(1 << (2 + i * self.n_side + j) for j in range(self.n_side))

    def b_row(self, i: int) -> int:
        return sum(1 << (2 + self.n_side**2 + i * self.n_side + j) for j in range(self.n_side))

    def g(self, mask: int) -> float:
        return 1.0 if popcount(mask & 0b11) == 1 else 0.0

    def h(self, mask: int) -> float:
        k = self.n_side
        out = 0.0
        if not mask & 1:
            out += 1 - math.prod(1 - popcount(mask & self.a_row(i)) / k for i in range(k))
        if not mask & 2:
            out += 1 - math.prod(1 - popcount(mask & self.b_row(i)) / k for i in range(k))
        return out

    def build(self, seed: int = 0):
        if not 0 <= self.kappa <= 1:
            raise ValueError("kappa must lie in [0,1]")
        if self.n_side < 1:
            raise ValueError("n must be positive")
        kap = self.kappa
        k = self.n_side
        a_rows = [self.a_row(i) for i in range(k)]
        b_rows = [self.b_row(i) for i in range(k)]

        def value(mask):
            return kap * self.g(mask) + (1 - kap) * self.h(mask)

        def side(masks, rows):
            prod = np.ones(len(masks))
            for row in rows:
                prod *= 1 - _bit_counts(masks, row) / k
            return 1 - prod

        def batch(masks):
            masks = np.asarray(masks, dtype=np.int64)
            g = (_bit_counts(masks, 0b11) == 1).astype(float)
            h = (1 - (masks & 1)) * side(masks, a_rows) + (1 - ((masks >> 1) & 1)) * side(masks, b_rows)
            return kap * g + (1 - kap) * h

        f = SetFunction(self.n, value, batch_fn=batch, name="kappa")
        return f, Cardinality(self.n, k + 1)


def kappa_default(beta: float) -> float:
    return min(1.0, math.exp(beta / 2) - 1)


FAMILIES = {
    "modular": Modular,
    "coverage": Coverage,
    "directed_cut": DirectedCut,
    "undirected_cut": UndirectedCut,
    "hard_monotone": HardMonotone,
    "hard_monotone_extended": HardMonotoneExtended,
    "arcs_symmetry_gap": ArcsSymmetryGap,
    "kappa_blend": KappaBlend,
}


def instantiate(family, seed: int = 0):
    """Build (oracle, constraint).  Families without a natural constraint
    return None for it."""
    return family.build(seed)
