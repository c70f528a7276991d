"""Ground sets, value oracles, vector operators and dummy augmentation.

Sets are represented internally as Python ints used as bitsets (bit ``u`` set
means element ``u`` is a member).  Public results are frozensets.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Union

import numpy as np

MAX_BITSET_N = 63
MAX_EXACT_N = 24
TOL = 1e-9

SetLike = Union[int, Iterable[int]]


def to_mask(S: SetLike) -> int:
    if isinstance(S, (int, np.integer)):
        return int(S)
    mask = 0
    for u in S:
        mask |= 1 << int(u)
    return mask


def members(mask: int) -> tuple[int, ...]:
    out = []
    u = 0
    while mask:
        if mask & 1:
            out.append(u)
        mask >>= 1
        u += 1
    return tuple(out)


def to_set(mask: int) -> frozenset[int]:
    return frozenset(members(mask))


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def full_mask(n: int) -> int:
    return (1 << n) - 1


def popcounts(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(masks.astype(np.uint64)).astype(np.int64)


def all_masks(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


class SetFunction:
    """Value oracle with memoization and a query counter.

    ``value_fn`` maps a bitset int to a float.  ``batch_fn`` (optional) maps an
    int64 array of bitsets to an array of values and is used for exhaustive
    work (tables, brute force, sampling).  The ``monotone`` and ``symmetric``
    flags are claims; the oracle module can check them.
    """

    def __init__(
        self,
        n: int,
        value_fn: Callable[[int], float],
        *,
        batch_fn: Callable[[np.ndarray], np.ndarray] | None = None,
        monotone: bool = False,
        symmetric: bool = False,
        name: str = "f",
    ):
        if n < 0:
            raise ValueError("ground set size must be nonnegative")
        if n > MAX_BITSET_N:
            raise ValueError(f"bitset sets support at most {MAX_BITSET_N} elements")
        self.n = n
        self.value_fn = value_fn
        self.batch_fn = batch_fn
        self.monotone = monotone
        self.symmetric = symmetric
        self.name = name
        self._cache: dict[int, float] = {}
        self._queries = 0
        self._lock = threading.Lock()
        self._table: np.ndarray | None = None

    @classmethod
    def from_sets(cls, n: int, fn: Callable[[frozenset[int]], float], **kw) -> "SetFunction":
        return cls(n, lambda mask: float(fn(to_set(mask))), **kw)

    @property
    def queries(self) -> int:
        return self._queries

    @property
    def ground(self) -> int:
        return full_mask(self.n)

    def fresh(self) -> "SetFunction":
        """Copy with an empty cache and a zero counter (one per solver run)."""
        g = SetFunction(
            self.n,
            self.value_fn,
            batch_fn=self.batch_fn,
            monotone=self.monotone,
            symmetric=self.symmetric,
            name=self.name,
        )
        g._table = self._table
        return g

    def _count(self, k: int) -> None:
        with self._lock:
            self._queries += k

    def __call__(self, S: SetLike) -> float:
        mask = to_mask(S)
        if mask >> self.n:
            raise IndexError("set contains elements outside the ground set")
        hit = self._cache.get(mask)
        if hit is not None:
            return hit
        val = float(self.value_fn(mask))
        self._cache[mask] = val
        self._count(1)
        return val

    value = __call__

    def marginal(self, S: SetLike, u: int) -> float:
        return marginal(self, S, u)

    def values(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        if self._table is not None:
            return self._table[masks]
        if self.batch_fn is not None:
            self._count(masks.size)
            return np.asarray(self.batch_fn(masks), dtype=float)
        return np.array([self(int(m)) for m in masks.ravel()], dtype=float).reshape(masks.shape)

    def table(self) -> np.ndarray:
        """Values of every subset, indexed by bitset (n <= 24)."""
        if self._table is None:
            if self.n > MAX_EXACT_N:
                raise ValueError(f"full tables are limited to n <= {MAX_EXACT_N}")
            self._table = self.values(all_masks(self.n))
            self._table.setflags(write=False)
        return self._table


def marginal(f: SetFunction, S: SetLike, u: int) -> float:
    """f(u | S) = f(S + u) - f(S)."""
    if not 0 <= u < f.n:
        raise IndexError(f"element {u} outside ground set of size {f.n}")
    mask = to_mask(S)
    bit = 1 << u
    if mask & bit:
        return 0.0
    return f(mask | bit) - f(mask)


def _check_pair(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def join(x, y) -> np.ndarray:
    x, y = _check_pair(x, y)
    return np.maximum(x, y)


def meet(x, y) -> np.ndarray:
    x, y = _check_pair(x, y)
    return np.minimum(x, y)


def hadamard(x, y) -> np.ndarray:
    x, y = _check_pair(x, y)
    return x * y


def prob_sum(x, y) -> np.ndarray:
    """Coordinate-wise probabilistic sum x + y - x*y."""
    x, y = _check_pair(x, y)
    return x + y - x * y


def indicator(S: SetLike, n: int) -> np.ndarray:
    v = np.zeros(n)
    for u in members(to_mask(S)):
        v[u] = 1.0
    return v


def support_mask(x: np.ndarray, tol: float = 1e-12) -> int:
    mask = 0
    for u, xu in enumerate(np.asarray(x)):
        if xu > 1 - tol:
            mask |= 1 << u
    return mask


@dataclass
class BicriteriaOutcome:
    """Solution plus its value and achieved infeasibility ratio.

    ``infeasibility`` is None when no certificate can be computed for the
    region at hand.
    """

    solution: Any
    value: float
    infeasibility: float | None
    queries: int
    seed: int | None = None
    trace: dict = field(default_factory=dict)


@dataclass
class Instance:
    f: SetFunction
    constraint: Any


@dataclass
class AugmentedInstance:
    f: SetFunction
    constraint: Any
    n_original: int

    @property
    def dummies(self) -> int:
        return self.f.n - self.n_original

    def strip(self, S: SetLike) -> frozenset[int]:
        return to_set(to_mask(S) & full_mask(self.n_original))

    def strip_mask(self, mask: int) -> int:
        return mask & full_mask(self.n_original)


def augment_function(f: SetFunction, count: int) -> SetFunction:
    if count < 0:
        raise ValueError("dummy count must be nonnegative")
    if count == 0:
        return f
    keep = full_mask(f.n)
    inner_value = f.value_fn
    inner_batch = f.batch_fn
    batch = None
    if inner_batch is not None:
        batch = lambda masks: inner_batch(np.asarray(masks, dtype=np.int64) & keep)
    return SetFunction(
        f.n + count,
        lambda mask: inner_value(mask & keep),
        batch_fn=batch,
        monotone=f.monotone,
        symmetric=False,
        name=f"{f.name}+{count}dummies",
    )


def augment_with_dummies(instance: Instance, count: int) -> AugmentedInstance:
    """Add ``count`` valueless elements after the original ones.

    Knapsack dummies cost B, cardinality dummies cost one unit, and matroid
    dummies are free up to the rank of the original matroid.
    """
    from . import constraints as C

    if count < 0:
        raise ValueError("dummy count must be nonnegative")
    f = instance.f
    g = augment_function(f, count)
    con = instance.constraint
    if count == 0:
        new_con = con
    elif isinstance(con, C.Cardinality):
        new_con = C.Cardinality(f.n + count, con.k)
    elif isinstance(con, C.Knapsack):
        prices = np.concatenate([con.prices, np.full(count, con.budget)])
        new_con = C.Knapsack(prices, con.budget, allow_oversize=con.allow_oversize)
    elif isinstance(con, C.Matroid):
        new_con = C.DummyExtendedMatroid(con, count)
    elif con is None:
        new_con = None
    else:
        raise TypeError(f"cannot add dummies to constraint {type(con).__name__}")
    return AugmentedInstance(g, new_con, f.n)
