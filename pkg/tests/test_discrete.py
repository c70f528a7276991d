import math

import numpy as np
import pytest

from bicriteria.constraints import Cardinality, Knapsack, PartitionMatroid, UniformMatroid, infeasibility_ratio
from bicriteria.core import SetFunction
from bicriteria.discrete import (
    combinatorial_general,
    density_greedy_monotone,
    density_greedy_symmetric,
    double_greedy_unconstrained,
    exhaustive_unconstrained,
    iterative_matroid_greedy,
    warmup_cardinality,
)
from bicriteria.functions import DirectedCut, Modular, UndirectedCut, random_coverage, random_graph
from bicriteria.oracle import brute_opt


def modular(*w):
    return Modular(tuple(float(v) for v in w)).build()[0]


def zero(n):
    return SetFunction(n, lambda m: 0.0, monotone=True, symmetric=True)


# ---------------------------------------------------------------- density greedy


def test_density_greedy_examples():
    out = density_greedy_monotone(modular(3, 2, 1), Cardinality(3, 1), 0.5)
    assert out.solution == {0} and out.value == 3
    out = density_greedy_monotone(modular(1, 1), Cardinality(2, 3), 0.1)
    assert out.solution == {0, 1} and out.trace["early_exit"]
    out = density_greedy_monotone(modular(3, 2), Knapsack([2, 1], 2), 0.9)
    assert out.solution == {1} and out.value == 2


def test_density_greedy_refuses_nonmonotone():
    with pytest.raises(ValueError):
        density_greedy_monotone(random_graph(4, 0.5, 0).build()[0], Cardinality(4, 1), 0.5)


@pytest.mark.parametrize("seed", range(6))
def test_density_greedy_bounds_and_trace(seed):
    rng = np.random.default_rng(seed)
    n = 10
    f = random_coverage(n, 14, seed).build()[0]
    k = Knapsack(np.round(0.2 + rng.random(n), 2), 1.2)
    opt = brute_opt(f, k)[1]
    for eps in (0.5, 0.25, 0.1):
        out = density_greedy_monotone(f, k, eps)
        assert out.value >= (1 - eps) * opt - 1e-9
        assert out.infeasibility <= 1 + math.log(1 / eps) + 1e-9
        picks = out.trace["picks"]
        dens = [p.marginal / k.prices[p.element] for p in picks]
        assert all(b <= a + 1e-9 for a, b in zip(dens, dens[1:]))


# ---------------------------------------------------------------- matroid greedy


def test_matroid_greedy_examples():
    pm = PartitionMatroid(4, [[0, 1], [2, 3]], [1, 1])
    out = iterative_matroid_greedy(modular(4, 3, 2, 1), pm, 0.3)
    assert out.solution == {0, 1, 2, 3} and out.value == 10
    assert out.value >= 0.7 * brute_opt(modular(4, 3, 2, 1), pm)[1]
    out = iterative_matroid_greedy(modular(2, 1), UniformMatroid(2, 1), 0.5)
    assert out.solution == {0} and out.trace["rounds"] == 1
    assert iterative_matroid_greedy(modular(2, 1), UniformMatroid(2, 1), 0.99).trace["rounds"] == 1
    with pytest.raises(ValueError):
        iterative_matroid_greedy(modular(2, 1), UniformMatroid(2, 1), 1.0)


def test_matroid_greedy_rounds_are_independent_and_disjoint():
    f = random_coverage(9, 12, 2).build()[0]
    m = UniformMatroid(9, 2)
    out = iterative_matroid_greedy(f, m, 0.125)
    sets = out.trace["sets"]
    assert len(sets) == 3
    assert all(m.is_independent(T) for T in sets)
    assert sum(len(T) for T in sets) == len(out.solution)
    assert out.infeasibility <= 3


# ---------------------------------------------------------------- double greedy


def test_double_greedy_examples():
    f = DirectedCut(2, ((0, 1, 1.0),)).build()[0]
    mean = np.mean([double_greedy_unconstrained(f, s)[1] for s in range(200)])
    assert mean >= 0.5
    assert double_greedy_unconstrained(modular(1, 2, 3), 0)[0] == {0, 1, 2}
    assert double_greedy_unconstrained(zero(3), 0)[1] == 0


@pytest.mark.parametrize("seed", range(4))
def test_double_greedy_mean_bound(seed):
    f = random_graph(7, 0.5, seed, directed=True).build()[0]
    best = brute_opt(f)[1]
    vals = np.array([double_greedy_unconstrained(f, s)[1] for s in range(200)])
    sigma = vals.std(ddof=1) / math.sqrt(len(vals))
    assert vals.mean() >= best / 2 + f(0) / 4 - 3 * sigma


def test_exhaustive_unconstrained_is_maximum():
    f = random_graph(8, 0.5, 3).build()[0]
    S, v = exhaustive_unconstrained(f)
    assert v == brute_opt(f)[1] and f(S) == v


# ---------------------------------------------------------------- warm-up and general combinatorial


def test_warmup_example():
    out = warmup_cardinality(modular(5, 4, 3, 2), 1, 0.25, seed=3)
    assert out.value >= 0.25 * 5
    assert len(out.solution) <= 2 * 2 * 1
    assert warmup_cardinality(zero(4), 1, 0.25).value == 0


def test_warmup_rejects_eps():
    with pytest.raises(ValueError):
        warmup_cardinality(modular(1, 1), 1, 0.5)


@pytest.mark.parametrize("seed", range(5))
def test_warmup_trace_disjoint_and_bounds(seed):
    f = random_graph(9, 0.5, seed, directed=True).build()[0]
    B, eps = 2, 0.25
    out = warmup_cardinality(f, B, eps, seed)
    ell = out.trace["ell"]
    As = [it["A"] for it in out.trace["iterations"]]
    assert len(As) == ell
    for i in range(ell):
        for j in range(i + 1, ell):
            assert not As[i] & As[j]
    assert len(out.solution) <= 2 * ell * B
    opt = brute_opt(f, Cardinality(9, B))[1]
    assert out.value >= (0.5 - eps) * opt - 1e-9
    # exhaustive extension certifies the per-iteration inequality exactly
    for it in out.trace["iterations"]:
        assert it["value"] >= it["base"] / 4 - 1e-12


def test_combinatorial_examples():
    f = modular(5, 4, 3, 2)
    out = combinatorial_general(f, Knapsack([1, 1, 1, 1], 1), 0.25, seed=0)
    assert out.value >= 0.25 * 5
    assert out.infeasibility <= 3 * 2 * 1
    out = combinatorial_general(f, UniformMatroid(4, 1), 0.25, seed=0)
    assert infeasibility_ratio(out.solution, UniformMatroid(4, 1)) <= 2 * 2
    assert combinatorial_general(zero(4), Knapsack([1] * 4, 1), 0.25).value == 0


def test_combinatorial_rejects_zero_price_and_bad_eps():
    with pytest.raises(ValueError):
        combinatorial_general(modular(1, 1), Knapsack([0, 1], 1), 0.25)
    with pytest.raises(ValueError):
        combinatorial_general(modular(1, 1), Knapsack([1, 1], 1), 0.6)


# ---------------------------------------------------------------- symmetric density greedy


def test_symmetric_greedy_examples():
    f = UndirectedCut(2, ((0, 1, 1.0),)).build()[0]
    out = density_greedy_symmetric(f, Cardinality(2, 1), 0.25, 0.1)
    assert len(out.solution) == 1 and out.value == 1
    const = SetFunction(3, lambda m: 2.0, symmetric=True)
    out = density_greedy_symmetric(const, Cardinality(3, 1), 0.25, 0.1)
    assert out.solution == frozenset() and out.value == 2
    out = density_greedy_symmetric(f, Cardinality(2, 1), 0.5, 0.1)
    assert out.solution == frozenset() and out.trace["threshold"] <= 0


def test_symmetric_greedy_refuses_asymmetric():
    with pytest.raises(ValueError):
        density_greedy_symmetric(DirectedCut(2, ((0, 1, 1.0),)).build()[0], Cardinality(2, 1), 0.25, 0.1)


@pytest.mark.parametrize("seed", range(6))
def test_symmetric_greedy_bounds(seed):
    n = 9
    f = random_graph(n, 0.5, seed).build()[0]
    rng = np.random.default_rng(seed)
    k = Knapsack(np.round(0.2 + rng.random(n), 2), 1.5)
    opt = brute_opt(f, k)[1]
    for eps, delta in ((0.1, 0.05), (0.25, 0.1)):
        out = density_greedy_symmetric(f, k, eps, delta)
        assert out.value >= (0.5 - eps - delta) * opt - 1e-9
        assert out.infeasibility <= 1 + 0.5 * math.log(1 / (2 * eps)) + 1e-9
        assert out.trace["removals"] <= n * n / delta
