import math

import numpy as np
import pytest

from bicriteria.constraints import (
    GraphicMatroid,
    Knapsack,
    PartitionMatroid,
    UniformMatroid,
    matroid_union_independent,
)
from bicriteria.functions import Modular, random_coverage, random_graph
from bicriteria.multilinear import MultilinearExtension
from bicriteria.rounding import pipage_knapsack, pipage_matroid


def test_knapsack_examples():
    k = Knapsack([1, 1, 1], 1)
    assert pipage_knapsack([1.0, 0.0, 1.0], k) == {0, 2}
    k2 = Knapsack([1, 1], 1)
    outs = [pipage_knapsack([0.5, 0.5], k2, seed=s) for s in range(2000)]
    assert all(len(S) == 1 for S in outs)
    share = sum(S == {0} for S in outs) / len(outs)
    assert abs(share - 0.5) < 3 * math.sqrt(0.25 / len(outs))


def test_knapsack_zero_price_phase():
    k = Knapsack([0, 1, 1], 1)
    outs = [pipage_knapsack([0.3, 0.5, 0.5], k, seed=s) for s in range(3000)]
    share = np.mean([0 in S for S in outs])
    assert abs(share - 0.3) < 3 * math.sqrt(0.21 / len(outs))


def test_knapsack_modular_expectation():
    w = (1.0, 2.0, 3.0, 0.5)
    f = Modular(w).build()[0]
    x = np.array([0.2, 0.7, 0.4, 0.9])
    k = Knapsack([1.0, 0.5, 2.0, 1.0], 2.0)
    vals = np.array([f(pipage_knapsack(x, k, seed=s)) for s in range(5000)])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - np.dot(w, x)) <= 3 * se


def test_knapsack_cost_bound_hard():
    rng = np.random.default_rng(0)
    for run in range(10_000):
        n = int(rng.integers(2, 9))
        p = np.round(0.1 + rng.random(n), 3)
        B = float(p.max() + rng.random())
        k = Knapsack(p, B)
        x = rng.random(n)
        S = pipage_knapsack(x, k, seed=run)
        assert k.cost(S) <= p @ x + B + 1e-9


def test_cardinality_specialization():
    rng = np.random.default_rng(1)
    k = Knapsack(np.ones(6), 2)
    for s in range(500):
        x = rng.random(6)
        assert len(pipage_knapsack(x, k, seed=s)) <= math.ceil(x.sum() - 1e-9)


def test_knapsack_each_step_fixes_a_coordinate():
    rng = np.random.default_rng(2)
    k = Knapsack(np.round(0.1 + rng.random(8), 2), 1.5)
    for s in range(50):
        trace = []
        pipage_knapsack(rng.random(8), k, seed=s, trace=trace)
        assert all(b > a for a, b in zip(trace, trace[1:]))


@pytest.mark.parametrize("rounder", ["knapsack", "matroid"])
def test_submodular_expectation(rounder):
    f = random_graph(6, 0.6, 3, directed=True).build()[0]
    F = MultilinearExtension(f)
    rng = np.random.default_rng(4)
    if rounder == "knapsack":
        k = Knapsack(np.ones(6), 2)
        x = rng.random(6)
        go = lambda s: pipage_knapsack(x, k, f, s)
    else:
        m = UniformMatroid(6, 2)
        x = rng.random(6)
        x *= 2 / x.sum()
        x = np.minimum(x, 1)
        go = lambda s: pipage_matroid(x, 1, m, f, s)
    vals = np.array([f(go(s)) for s in range(5000)])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert vals.mean() >= F(x) - 3 * se


def test_matroid_examples():
    m = UniformMatroid(3, 2)
    assert pipage_matroid([1.0, 0.0, 1.0], 1, m) == {0, 2}
    r1 = UniformMatroid(2, 1)
    w = (1.0, 3.0)
    f = Modular(w).build()[0]
    outs = [pipage_matroid([0.5, 0.5], 1, r1, f, s) for s in range(4000)]
    assert all(len(S) == 1 for S in outs)
    vals = np.array([f(S) for S in outs])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - 2.0) <= 3 * se
    pm = PartitionMatroid(4, [[0, 1], [2, 3]], [1, 1])
    for s in range(200):
        S = pipage_matroid([0.5] * 4, 1, pm, seed=s)
        assert len(S & {0, 1}) == 1 and len(S & {2, 3}) == 1


def test_matroid_rejects_outside_point():
    with pytest.raises(ValueError):
        pipage_matroid([0.8, 0.8], 1, UniformMatroid(2, 1))


@pytest.mark.parametrize("beta", [1.0, 1.5, 2.0, 2.7])
def test_matroid_output_splits_into_ceil_beta_sets(beta):
    edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 0), (1, 3), (0, 1)]
    m = GraphicMatroid(4, edges)
    rng = np.random.default_rng(int(beta * 10))
    kfold = math.ceil(beta)
    for s in range(60):
        # random point of beta * P(M): convex mix of scaled bases
        x = np.zeros(m.n)
        for _ in range(3):
            order = rng.permutation(m.n)
            base = 0
            for u in order:
                if m.is_independent(base | (1 << int(u))):
                    base |= 1 << int(u)
            x += np.array([(base >> u) & 1 for u in range(m.n)], dtype=float) / 3
        x = np.minimum(beta * x * rng.uniform(0.7, 1.0), 1.0)
        trace = []
        S = pipage_matroid(x, beta, m, seed=s, trace=trace)
        assert matroid_union_independent(m, kfold, S)
        counts = [c for _, c in trace]
        assert all(b >= a for a, b in zip(counts, counts[1:]))
        assert counts == [] or counts[-1] == m.n


def test_coverage_expectation_matroid():
    f = random_coverage(5, 7, 2).build()[0]
    F = MultilinearExtension(f)
    x = np.array([0.3, 0.4, 0.3, 0.5, 0.5])
    m = PartitionMatroid(5, [[0, 1, 2], [3, 4]], [1, 1])
    vals = np.array([f(pipage_matroid(x, 1, m, f, s)) for s in range(5000)])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert vals.mean() >= F(x) - 3 * se
