"""Combinatorial solvers: density greedy, iterative matroid greedy, the two
combinatorial 1/2-bicriteria algorithms, the symmetric density greedy and
double greedy for unconstrained maximization.

Ties are broken toward the lowest element index everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constraints import (
    Cardinality,
    DummyExtendedMatroid,
    Knapsack,
    Matroid,
    as_knapsack,
    infeasibility_ratio,
)
from .core import (
    BicriteriaOutcome,
    Instance,
    SetFunction,
    augment_with_dummies,
    full_mask,
    members,
    popcount,
    to_set,
)

EXACT_DG_LIMIT = 20


@dataclass
class Pick:
    element: int
    marginal: float
    after: float  # cost (or size) after the pick


def _ceil(x: float) -> int:
    # absorb float noise such as log2(1/0.125) = 3.0000000000000004
    return math.ceil(x - 1e-12)


# ---------------------------------------------------------------- density greedy


def _density_greedy(f: SetFunction, prices: np.ndarray, threshold: float, ground: int):
    """Core loop of the density greedy on f restricted to ``ground``; no
    monotonicity check.  Returns (mask, picks)."""
    total = sum(prices[u] for u in members(ground))
    if total <= threshold:
        return ground, []
    S = 0
    cost = 0.0
    for u in members(ground):
        if prices[u] == 0:
            S |= 1 << u
    picks: list[Pick] = []
    while cost < threshold:
        best, best_d, best_m = -1, -math.inf, 0.0
        base = f(S)
        for u in members(ground & ~S):
            m = f(S | (1 << u)) - base
            d = m / prices[u]
            if d > best_d:
                best, best_d, best_m = u, d, m
        if best < 0:
            break
        S |= 1 << best
        cost += prices[best]
        picks.append(Pick(best, best_m, cost))
    return S, picks


def density_greedy_monotone(f: SetFunction, constraint, eps: float) -> BicriteriaOutcome:
    """(1 - eps)-approximation with cost below (1 + ln(1/eps)) B for monotone f."""
    if not f.monotone:
        raise ValueError("density greedy requires a monotone objective")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    k = as_knapsack(constraint)
    if k.n != f.n:
        raise ValueError("constraint and objective disagree on the ground set")
    g = f.fresh()
    S, picks = _density_greedy(g, k.prices, k.budget * math.log(1 / eps), full_mask(f.n))
    return BicriteriaOutcome(
        to_set(S), g(S), infeasibility_ratio(S, constraint), g.queries,
        trace={"picks": picks, "early_exit": not picks and S == full_mask(f.n)},
    )


# ---------------------------------------------------------------- matroid greedy


def _matroid_rounds(f: SetFunction, m: Matroid, rounds: int, ground: int):
    S = 0
    sets: list[int] = []
    for _ in range(rounds):
        T = 0
        while True:
            base = f(S | T)
            best, best_m = -1, -math.inf
            for u in members(ground & ~(S | T)):
                if not m.is_independent(T | (1 << u)):
                    continue
                mu = f(S | T | (1 << u)) - base
                if mu > best_m:
                    best, best_m = u, mu
            if best < 0:
                break
            T |= 1 << best
        sets.append(T)
        S |= T
    return S, sets


def iterative_matroid_greedy(f: SetFunction, m: Matroid, eps: float) -> BicriteriaOutcome:
    """ceil(log2(1/eps)) rounds of matroid greedy, each building a fresh
    independent set disjoint from earlier picks."""
    if not f.monotone:
        raise ValueError("iterative matroid greedy requires a monotone objective")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    g = f.fresh()
    rounds = _ceil(math.log2(1 / eps))
    S, sets = _matroid_rounds(g, m, rounds, full_mask(f.n))
    return BicriteriaOutcome(
        to_set(S), g(S), infeasibility_ratio(S, m), g.queries,
        trace={"rounds": rounds, "sets": [to_set(T) for T in sets]},
    )


# ---------------------------------------------------------------- double greedy


def double_greedy_unconstrained(f: SetFunction, seed: int, ground: int | None = None):
    """Randomized double greedy; E[f(X)] >= max/2 + f(empty)/4."""
    rng = np.random.default_rng(seed)
    ground = f.ground if ground is None else ground
    X, Y = 0, ground
    for u in members(ground):
        bit = 1 << u
        a = max(f(X | bit) - f(X), 0.0)
        b = max(f(Y & ~bit) - f(Y), 0.0)
        p = 1.0 if a + b == 0 else a / (a + b)
        if rng.random() < p:
            X |= bit
        else:
            Y &= ~bit
    return to_set(X), f(X)


def _subset_masks(ground: int) -> np.ndarray:
    elems = members(ground)
    masks = np.zeros(1, dtype=np.int64)
    for u in elems:
        masks = np.concatenate([masks, masks | np.int64(1 << u)])
    return masks


def exhaustive_unconstrained(f: SetFunction, ground: int | None = None, offset: int = 0):
    """max over D within ``ground`` of f(offset | D); the first maximizer in
    subset-enumeration order wins."""
    ground = f.ground if ground is None else ground
    if popcount(ground) > EXACT_DG_LIMIT:
        raise ValueError(f"exhaustive search is limited to {EXACT_DG_LIMIT} elements")
    masks = _subset_masks(ground)
    vals = f.values(masks | np.int64(offset))
    j = int(np.argmax(vals))
    return to_set(int(masks[j])), float(vals[j])


def _best_extension(f, A_i: int, pool: int, seed: int, exact_limit: int):
    """D within pool approximately maximizing f(A_i | D)."""
    if popcount(pool) <= exact_limit:
        D, _ = exhaustive_unconstrained(f, pool, A_i)
        return sum(1 << u for u in D)
    g = SetFunction(f.n, lambda mask: f(mask | A_i))
    D, _ = double_greedy_unconstrained(g, seed, pool)
    return sum(1 << u for u in D)


def _finish(f, aug, pieces, seed, exact_limit, real):
    """Shared tail of the two combinatorial algorithms."""
    A = 0
    for P in pieces:
        A |= P
    pool = A & real  # dummies never change values
    rng = np.random.default_rng(seed)
    best, best_val, snaps = 0, -math.inf, []
    for i, A_i in enumerate(pieces):
        sub_seed = int(rng.integers(2**63))
        D_i = _best_extension(f, A_i, pool, sub_seed, exact_limit)
        val = f(A_i | D_i)
        snaps.append({"A": to_set(aug.strip_mask(A_i)), "D": to_set(D_i), "value": val, "base": f(A_i)})
        if val > best_val:
            best, best_val = A_i | D_i, val
    return aug.strip_mask(best), snaps


def warmup_cardinality(
    f: SetFunction, B: int, eps: float, seed: int = 0, *, exact_limit: int = EXACT_DG_LIMIT
) -> BicriteriaOutcome:
    """1/2 - eps of the optimum using O(1/eps) times the cardinality budget."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if B < 0:
        raise ValueError("budget must be nonnegative")
    ell = math.ceil(1 / (2 * eps))
    aug = augment_with_dummies(Instance(f, Cardinality(f.n, B)), 2 * ell * B)
    g = aug.f.fresh()
    real = full_mask(f.n)
    A = 0
    pieces = []
    for _ in range(ell):
        A_i = 0
        for _ in range(2 * B):
            base = g(A_i)
            best, best_m = -1, -math.inf
            for u in members(g.ground & ~(A | A_i)):
                mu = g(A_i | (1 << u)) - base
                if mu > best_m:
                    best, best_m = u, mu
            if best < 0:
                break
            A_i |= 1 << best
        pieces.append(A_i)
        A |= A_i
    S, snaps = _finish(g, aug, pieces, seed, exact_limit, real)
    return BicriteriaOutcome(
        to_set(S), f.fresh()(S), infeasibility_ratio(S, Cardinality(f.n, B)), g.queries, seed,
        trace={"ell": ell, "iterations": snaps},
    )


def combinatorial_general(
    f: SetFunction, constraint, eps: float, seed: int = 0, *, exact_limit: int = EXACT_DG_LIMIT
) -> BicriteriaOutcome:
    """1/2 - eps of the optimum under a knapsack or matroid constraint with
    O(1/eps) infeasibility."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    ell = math.ceil(1 / (2 * eps))
    real = full_mask(f.n)
    if isinstance(constraint, Matroid):
        k = constraint.rank()
        aug = augment_with_dummies(Instance(f, constraint), 2 * ell * k)
        g = aug.f.fresh()
        m_aug: DummyExtendedMatroid | Matroid = aug.constraint
        A, pieces = 0, []
        for _ in range(ell):
            A_i, _ = _matroid_rounds(g, m_aug, 2, g.ground & ~A)
            pieces.append(A_i)
            A |= A_i
    else:
        if isinstance(constraint, Cardinality):
            constraint = Knapsack(np.ones(f.n), constraint.k)
        if not isinstance(constraint, Knapsack):
            raise TypeError("constraint must be a knapsack, cardinality or matroid constraint")
        if np.any(constraint.prices <= 0):
            raise ValueError("knapsack mode requires strictly positive prices")
        aug = augment_with_dummies(Instance(f, constraint), 2 * ell)
        g = aug.f.fresh()
        prices = aug.constraint.prices
        A, pieces = 0, []
        for _ in range(ell):
            A_i, _ = _density_greedy(g, prices, 2 * constraint.budget, g.ground & ~A)
            pieces.append(A_i)
            A |= A_i
    S, snaps = _finish(g, aug, pieces, seed, exact_limit, real)
    return BicriteriaOutcome(
        to_set(S), f.fresh()(S), infeasibility_ratio(S, constraint), g.queries, seed,
        trace={"ell": ell, "iterations": snaps},
    )


# ---------------------------------------------------------------- symmetric


def density_greedy_symmetric(f: SetFunction, constraint, eps: float, delta: float) -> BicriteriaOutcome:
    """Density greedy with a clean-up step for symmetric objectives:
    1/2 - eps - delta of the optimum, cost up to (1 + ln(1/(2 eps))/2) B."""
    if not f.symmetric:
        raise ValueError("symmetric density greedy requires a symmetric objective")
    if not 0 < eps < 1 or delta <= 0:
        raise ValueError("need eps in (0,1) and delta > 0")
    k = as_knapsack(constraint)
    g = f.fresh()
    n = f.n
    p = k.prices
    m = max([g(0)] + [g(1 << u) for u in range(n)])
    slack = delta * m / n if n else 0.0
    threshold = k.budget / 2 * math.log(1 / (2 * eps))
    S, prev = 0, 0
    removals = 0
    picks: list[Pick] = []

    def cost(mask):
        return float(sum(p[u] for u in members(mask)))

    while cost(S) < threshold:
        removed = True
        while removed:
            removed = False
            for u in members(S):
                if g(S) - g(S & ~(1 << u)) < -slack:
                    S &= ~(1 << u)
                    removals += 1
                    removed = True
                    break
        prev = S
        base = g(S)
        gains = {u: g(S | (1 << u)) - base for u in members(g.ground & ~S)}
        zero = [u for u, mu in gains.items() if p[u] == 0 and mu > 0]
        if zero:
            u = zero[0]
        elif any(mu > 0 for mu in gains.values()):
            u = max((v for v in gains if p[v] > 0), key=lambda v: (gains[v] / p[v], -v))
        else:
            S = prev
            break
        S |= 1 << u
        picks.append(Pick(u, gains[u], cost(S)))
    return BicriteriaOutcome(
        to_set(S), g(S), infeasibility_ratio(S, constraint), g.queries,
        trace={"picks": picks, "removals": removals, "threshold": threshold},
    )
