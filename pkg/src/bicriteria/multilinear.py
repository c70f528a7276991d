"""Multilinear extension: exact (table contraction) and Monte-Carlo modes."""

from __future__ import annotations

import math

import numpy as np

from .core import MAX_EXACT_N, SetFunction


def default_samples(n: int) -> int:
    return max(1000, math.ceil(10 * n * math.log(max(n, 2))))


class MultilinearExtension:
    """F(x) = E[f(R(x))] where R(x) contains each u independently w.p. x_u.

    Exact mode contracts the full value table one coordinate at a time, so an
    evaluation costs O(2^n) and a gradient O(n 2^n).  Sampled mode draws
    ``samples`` random sets per call from a stream keyed by (seed, call
    index), so a run is reproducible given its call sequence.
    """

    def __init__(self, f: SetFunction, mode: str = "exact", *, samples: int | None = None, seed: int = 0):
        if mode not in ("exact", "sampled"):
            raise ValueError("mode must be 'exact' or 'sampled'")
        if mode == "exact" and f.n > MAX_EXACT_N:
            raise ValueError(f"exact evaluation is limited to n <= {MAX_EXACT_N}")
        self.f = f
        self.n = f.n
        self.mode = mode
        self.samples = samples or default_samples(f.n)
        self.seed = seed
        self._calls = 0
        self._tensor = None

    def _table(self) -> np.ndarray:
        if self._tensor is None:
            # axis 0 holds the highest-index element
            self._tensor = self.f.table().reshape((2,) * self.n) if self.n else self.f.table()
        return self._tensor

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected a vector of length {self.n}")
        if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
            raise ValueError("x must lie in [0,1]^N")
        return np.clip(x, 0.0, 1.0)

    def _contract(self, lo: np.ndarray, hi: np.ndarray) -> float:
        T = self._table()
        for u in range(self.n - 1, -1, -1):
            T = T[0] * lo[u] + T[1] * hi[u]
        return float(T) if np.ndim(T) == 0 else float(T[0])

    def _rng(self) -> np.random.Generator:
        self._calls += 1
        return np.random.default_rng([self.seed, self._calls])

    def _draw(self, x: np.ndarray) -> np.ndarray:
        bits = self._rng().random((self.samples, self.n)) < x
        weights = (1 << np.arange(self.n, dtype=np.int64)).astype(np.int64)
        return bits.astype(np.int64) @ weights

    def eval(self, x) -> float:
        x = self._check(x)
        if self.mode == "exact":
            return self._contract(1 - x, x)
        return float(self.f.values(self._draw(x)).mean())

    __call__ = eval

    def eval_with_error(self, x) -> tuple[float, float]:
        """Estimate and its standard error (zero in exact mode)."""
        x = self._check(x)
        if self.mode == "exact":
            return self.eval(x), 0.0
        vals = self.f.values(self._draw(x))
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))

    def partial(self, x, u: int) -> float:
        """F(x with x_u = 1) - F(x with x_u = 0)."""
        x = self._check(x)
        if not 0 <= u < self.n:
            raise IndexError(u)
        if self.mode == "exact":
            lo, hi = 1 - x, x.copy()
            lo[u], hi[u] = -1.0, 1.0
            return self._contract(lo, hi)
        masks = self._draw(x)
        bit = np.int64(1 << u)
        return float((self.f.values(masks | bit) - self.f.values(masks & ~bit)).mean())

    def gradient(self, x) -> np.ndarray:
        x = self._check(x)
        if self.mode == "exact":
            return self._exact_gradient(x)
        # common random numbers: every coordinate reuses the same draws
        masks = self._draw(x)
        g = np.empty(self.n)
        for u in range(self.n):
            bit = np.int64(1 << u)
            g[u] = (self.f.values(masks | bit) - self.f.values(masks & ~bit)).mean()
        return g

    def _exact_gradient(self, x: np.ndarray) -> np.ndarray:
        n = self.n
        if n == 0:
            return np.zeros(0)
        T = self._table()
        g = np.empty(n)
        # contract elements above u first, reuse the partial result for every u below
        prefix = T
        for u in range(n - 1, -1, -1):
            rest = prefix[1] - prefix[0]
            for v in range(u - 1, -1, -1):
                rest = rest[0] * (1 - x[v]) + rest[1] * x[v]
            g[u] = float(rest)
            prefix = prefix[0] * (1 - x[u]) + prefix[1] * x[u]
        return g


def as_extension(F) -> MultilinearExtension:
    if isinstance(F, MultilinearExtension):
        return F
    if isinstance(F, SetFunction):
        return MultilinearExtension(F)
    raise TypeError("expected a SetFunction or MultilinearExtension")
