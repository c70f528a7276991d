"""Multilinear-extension solvers, discretized in time with Euler steps.

A horizon T is split into ``steps = ceil(T / dt)`` equal steps so the step
size divides T exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constraints import Knapsack, Region, as_knapsack, as_region, density, lp_maximize, rho
from .core import BicriteriaOutcome, prob_sum
from .multilinear import MultilinearExtension, as_extension


@dataclass
class ContinuousRun:
    dt: float
    T: float
    checkpoints: list = field(default_factory=list)  # (t, y, F(y))
    lp_values: list = field(default_factory=list)

    def record(self, t: float, y: np.ndarray, F: MultilinearExtension | None) -> None:
        self.checkpoints.append((t, y.copy(), F.eval(y) if F is not None else math.nan))

    def to_rows(self) -> list[list[float]]:
        return [[t, *y.tolist(), v] for t, y, v in self.checkpoints]


def _steps(T: float, dt: float) -> tuple[int, float]:
    if T < 0:
        raise ValueError("horizon must be nonnegative")
    if dt <= 0:
        raise ValueError("step must be positive")
    if T == 0:
        return 0, dt
    k = max(1, math.ceil(T / dt - 1e-9))
    return k, T / k


def _certify(region: Region, y: np.ndarray, scale: float) -> bool | None:
    if scale == 0:
        return bool(np.all(y == 0))
    return region.contains(y / scale, tol=1e-6)


def _region(region) -> Region:
    return as_region(region)


def _every(k: int) -> int:
    return max(1, k // 20)


# ---------------------------------------------------------------- measured greedy


def _mcg(F: MultilinearExtension, region: Region, T: float, dt: float, keep_dirs: bool = False):
    steps, h = _steps(T, dt)
    y = np.zeros(F.n)
    run = ContinuousRun(h, T)
    run.record(0.0, y, F)
    dirs = []
    for s in range(steps):
        x = lp_maximize(region, (1 - y) * F.gradient(y))
        if keep_dirs:
            dirs.append(x)
        y = y + h * x * (1 - y)
        if (s + 1) % _every(steps) == 0 or s + 1 == steps:
            run.record((s + 1) * h, y, F)
    return y, run, dirs


def measured_continuous_greedy(F, region, T: float, dt: float) -> BicriteriaOutcome:
    """Fractional point y with y/T in the region; for monotone f,
    F(y) >= (1 - e^-T) OPT up to discretization error."""
    F = as_extension(F)
    region = _region(region)
    if not region.down_closed:
        raise ValueError("region is not down-closed; use mcg_non_downclosed")
    y, run, _ = _mcg(F, region, T, dt)
    return BicriteriaOutcome(
        y, F.eval(y), T, F.f.queries,
        trace={"run": run, "certified": _certify(region, y, T)},
    )


def mcg_non_downclosed(F, region, T: float, dt: float) -> BicriteriaOutcome:
    """Measured greedy for regions that are not down-closed: returns x v x'
    where x' is a convex combination of the first unit of LP directions, so
    x' lies in the region and the output is dominated by a point of T*P."""
    if T < 1:
        raise ValueError("needs T >= 1")
    F = as_extension(F)
    region = _region(region)
    y, run, dirs = _mcg(F, region, T, dt, keep_dirs=True)
    h = run.dt
    m = math.ceil(1 / h - 1 - 1e-12)
    tail = 1 / h - m
    x_prime = h * (sum(dirs[:m], np.zeros(F.n)) + tail * dirs[m])
    out = np.maximum(y, x_prime)
    upper = h * sum(dirs, np.zeros(F.n))
    return BicriteriaOutcome(
        out, F.eval(out), T, F.f.queries,
        trace={
            "run": run,
            "x_prime": x_prime,
            "dominated": bool(np.all(out <= upper + 1e-9)),
            "x_prime_in_region": region.contains(x_prime, tol=1e-6),
        },
    )


# ---------------------------------------------------------------- knapsack double greedy


def _ratio(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = a + b
    out = np.zeros_like(a)
    np.divide(a, s, out=out, where=s > 0)
    return out


def continuous_double_greedy_knapsack(f, constraint, eps: float, dt: float) -> BicriteriaOutcome:
    """Coupled ascent from 0 and descent from 1 whose direction is capped so
    the final point costs at most B * rho(c, eps)."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0,1]")
    F = as_extension(f)
    k = as_knapsack(constraint)
    p = k.prices
    c = density(k)
    cap = k.budget * rho(c, eps)
    steps, h = _steps(1.0, dt)
    x, y = np.zeros(F.n), np.ones(F.n)
    run = ContinuousRun(h, 1.0)
    run.record(0.0, x, F)
    ells = []

    def direction(a, b, ell):
        return _ratio(np.maximum(a - ell * p, 0), np.maximum(b + ell * p, 0))

    for s in range(steps):
        a = F.gradient(x)
        b = -F.gradient(y)
        d = direction(a, b, 0.0)
        ell = 0.0
        if p @ d > cap:
            paid = p > 0
            lo, hi = 0.0, float(np.max(a[paid] / p[paid]))
            for _ in range(60):
                mid = (lo + hi) / 2
                if p @ direction(a, b, mid) <= cap:
                    hi = mid
                else:
                    lo = mid
            ell = hi
            d = direction(a, b, ell)
            Z = np.abs(np.maximum(a - ell * p, 0) + np.maximum(b + ell * p, 0)) <= 1e-9
            # near-degenerate ratios are float noise; Z coordinates get r only
            d[Z] = 0.0
            pz = float(p[Z].sum())
            if pz > 0:
                r = min(1.0, max(0.0, (cap - p @ d) / pz))
                d = d + r * Z
        ells.append(ell)
        x = x + h * d
        y = y + h * (d - 1)
        if (s + 1) % _every(steps) == 0 or s + 1 == steps:
            run.record((s + 1) * h, x, F)
    run.lp_values = ells
    cost = float(p @ x)
    return BicriteriaOutcome(
        x, F.eval(x), cost / k.budget if k.budget else math.inf, F.f.queries,
        trace={"run": run, "ell": ells, "cap": cap, "gap": float(np.max(np.abs(y - x)))},
    )


# ---------------------------------------------------------------- general regions


def guided_mcg(F, T: float, a, region, dt: float | None = None) -> BicriteriaOutcome:
    """Measured greedy that avoids mass already placed by the guide a:
    dy/dt = x o (1 - a (+) y)."""
    F = as_extension(F)
    region = _region(region)
    a = np.asarray(a, dtype=float)
    dt = dt if dt is not None else T / 200 if T > 0 else 1.0
    steps, h = _steps(T, dt)
    y = np.zeros(F.n)
    run = ContinuousRun(h, T)
    run.record(0.0, y, F)
    for s in range(steps):
        room = 1 - prob_sum(a, y)
        w = room * F.gradient(y)
        x = lp_maximize(region, w)
        run.lp_values.append(float(w @ x))
        y = y + h * x * room
        if (s + 1) % _every(steps) == 0 or s + 1 == steps:
            run.record((s + 1) * h, y, F)
    return BicriteriaOutcome(
        y, F.eval(y), T, F.f.queries,
        trace={
            "run": run,
            "certified": _certify(region, y, T),
            # Euler form of 1 - e^{-T(1-a)}; the discrete run can sit slightly above the ODE cap
            "below_cap": bool(np.all(y <= 1 - (1 - h * (1 - a)) ** steps + 1e-9)),
        },
    )


def dr_double_greedy(G: Callable[[np.ndarray], float], n: int) -> np.ndarray:
    """Deterministic double greedy for a function that is affine in each
    coordinate (such as a multilinear extension composed with coordinate-wise
    affine maps).  Coordinate u is fixed to a/(a+b), where a and b are the
    gains of raising the lower point and lowering the upper point; this
    gives G(x) >= G(o)/2 + G(0)/4 + G(1)/4 for every o in the cube.
    """
    x, y = np.zeros(n), np.ones(n)
    for u in range(n):
        gx = G(x)
        x[u] = 1.0
        a = G(x) - gx
        x[u] = 0.0
        gy = G(y)
        y[u] = 0.0
        b = G(y) - gy
        y[u] = 1.0
        a, b = max(a, 0.0), max(b, 0.0)
        q = 1.0 if a + b == 0 else a / (a + b)
        x[u] = y[u] = q
    return x


def general_bicriteria(F, region, eps: float, seed: int = 0, dt: float = 0.01) -> BicriteriaOutcome:
    """1/2 - O(eps) of the optimum over a down-closed region with O(1/eps)
    infeasibility, for non-monotone f."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    F = as_extension(F)
    region = _region(region)
    if not region.down_closed:
        raise ValueError("region must be down-closed")
    ell = math.ceil(1 / eps)
    n = F.n
    g = np.zeros(n)
    guides, total = [], np.zeros(n)
    lp_traces = []
    for _ in range(ell):
        out = guided_mcg(F, 2.0, g, region, dt)
        g_i = out.solution
        guides.append(g_i)
        total += g_i
        lp_traces.append(out.trace["run"].lp_values)
        g = np.minimum(g + g_i, 1.0)
    best, best_val = None, -math.inf
    for g_i in guides:
        d = dr_double_greedy(lambda x, g_i=g_i: F.eval(prob_sum(g_i, g * x)), n)
        r = prob_sum(g_i, g * d)
        val = F.eval(r)
        if val > best_val:
            best, best_val = r, val
    scale = 2 * (1 / eps + 2)
    return BicriteriaOutcome(
        best, best_val, scale, F.f.queries, seed,
        trace={
            "certified": _certify(region, best, scale),
            "guide_sum_max": float(total.max()) if n else 0.0,
            "lp_values": lp_traces,
            "ell": ell,
        },
    )


# ---------------------------------------------------------------- symmetric


def more_mcg(f, region, T: float, dt: float) -> BicriteriaOutcome:
    """Measured greedy for symmetric f that never pushes a coordinate past 1/2:
    dy/dt = x o (1 - 2y)."""
    F = as_extension(f)
    if not F.f.symmetric:
        raise ValueError("objective must be symmetric")
    region = _region(region)
    if not region.down_closed:
        raise ValueError("region must be down-closed")
    steps, h = _steps(T, dt)
    if h > 0.5:
        raise ValueError("step must be at most 1/2")
    y = np.zeros(F.n)
    run = ContinuousRun(h, T)
    run.record(0.0, y, F)
    for s in range(steps):
        room = 1 - 2 * y
        x = lp_maximize(region, room * F.gradient(y))
        y = y + h * x * room
        if (s + 1) % _every(steps) == 0 or s + 1 == steps:
            run.record((s + 1) * h, y, F)
    return BicriteriaOutcome(
        y, F.eval(y), T, F.f.queries,
        trace={"run": run, "certified": _certify(region, y, T) if T > 0 else True},
    )


def knapsack_density_cap(c: float, T: float) -> float:
    """Bound on <p, y(T)>/B for the half-capped dynamics at density c."""
    return (1 - math.exp(-2 * T * c)) / (2 * c)


def multi_opt_bound(ell: int, beta: float) -> float:
    """l (e^{-beta/l} - e^{-beta}) / (l - 1)."""
    if ell < 2:
        raise ValueError("ell must be at least 2")
    return ell * (math.exp(-beta / ell) - math.exp(-beta)) / (ell - 1)


def mcg_multi_opt(F, region, T: float, ell: int, dt: float | None = None) -> BicriteriaOutcome:
    """Slowed measured greedy over the l-times enlarged region, for instances
    with l disjoint optimal solutions."""
    if ell < 2:
        raise ValueError("ell must be at least 2")
    F = as_extension(F)
    region = _region(region)
    if not region.down_closed:
        raise ValueError("region must be down-closed")
    big = region.scaled(ell)
    dt = dt if dt is not None else (T / 200 if T > 0 else 1.0)
    steps, h = _steps(T, dt)
    y = np.zeros(F.n)
    run = ContinuousRun(h, T)
    run.record(0.0, y, F)
    for s in range(steps):
        x = lp_maximize(big, (1 - y) * F.gradient(y))
        y = y + h / ell * x * (1 - y)
        if (s + 1) % _every(steps) == 0 or s + 1 == steps:
            run.record((s + 1) * h, y, F)
    return BicriteriaOutcome(
        y, F.eval(y), T, F.f.queries,
        trace={"run": run, "certified": _certify(region, y, T) if T > 0 else True,
               "bound": multi_opt_bound(ell, T)},
    )


def symmetric_equality_postprocess(y, k: Knapsack) -> np.ndarray:
    """Move y toward the all-halves point until the budget is used exactly."""
    y = np.asarray(y, dtype=float)
    k = as_knapsack(k)
    c = density(k)
    if c > 0.5:
        raise ValueError("density above 1/2: apply the complement reduction first")
    if np.any(y > 0.5 + 1e-12) or np.any(y < -1e-12):
        raise ValueError("y must lie in [0, 1/2]^N")
    spent = float(k.prices @ y)
    B = k.budget
    full = B / (2 * c)  # price of the all-halves point
    if full - spent <= 0:
        return y.copy()
    t = max((B - spent) / (full - spent), 0.0)
    return y + t * (0.5 - y)
