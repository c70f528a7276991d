import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference as ref
from bicriteria.constraints import (
    BoxRegion,
    Cardinality,
    GraphicMatroid,
    Knapsack,
    KnapsackPolytope,
    MatroidBasePolytope,
    MatroidPolytope,
    NU_KNEE,
    OracleMatroid,
    PartitionMatroid,
    UniformMatroid,
    cardinality_polytope,
    density,
    infeasibility_ratio,
    lp_maximize,
    matroid_union_independent,
    nu,
    partition_into_independent,
    rho,
    rho_high,
    rho_low,
    union_rank_table,
)
from bicriteria.oracle import verify_matroid


def test_density():
    assert density(Knapsack([1, 1, 1, 1], 1)) == 0.25
    assert density(Knapsack([2, 2], 2)) == 0.5
    # price 3 exceeds the budget, so this one needs the oversize flag
    assert density(Knapsack([1, 3], 2, allow_oversize=True)) == 0.5
    with pytest.raises(ValueError):
        density(Knapsack([0, 0], 1))


def test_knapsack_rejects_oversize_prices():
    with pytest.raises(ValueError):
        Knapsack([3, 1], 2)
    assert Knapsack([3, 1], 2, allow_oversize=True).cost({0}) == 3


def test_rho_values():
    assert rho(0.5, 0.25) == pytest.approx(1.0)
    assert rho(0.25, 0.25) == pytest.approx(1.171573, abs=1e-6)
    assert rho(0.75, 0.25) == pytest.approx(0.833333, abs=1e-6)
    with pytest.raises(ValueError):
        rho(1.0, 0.5)
    with pytest.raises(ValueError):
        rho(0.5, 0.0)


def test_rho_continuous_at_half():
    for eps in np.arange(0.05, 0.96, 0.05):
        assert abs(rho_low(0.5, eps) - rho_high(0.5, eps)) <= 1e-12
        assert rho_low(0.5, eps) == pytest.approx(2 * (1 - math.sqrt(eps)))


def test_nu_values():
    assert nu(0) == 0
    assert nu(NU_KNEE) == pytest.approx(0.5, abs=1e-15)
    assert nu(1) == pytest.approx(0.4773024, abs=1e-7)
    assert nu(5) == 0.5
    with pytest.raises(ValueError):
        nu(-0.1)
    grid = np.linspace(0, NU_KNEE, 200)
    vals = [nu(b) for b in grid]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


def test_lp_examples():
    np.testing.assert_array_equal(lp_maximize(KnapsackPolytope([1, 1], 1), [3, 2]), [1, 0])
    np.testing.assert_array_equal(lp_maximize(KnapsackPolytope([1, 1], 1), [-1, 0]), [0, 0])
    np.testing.assert_array_equal(lp_maximize(MatroidPolytope(UniformMatroid(2, 1)), [2, 5]), [0, 1])
    np.testing.assert_array_equal(lp_maximize(KnapsackPolytope([2, 2], 1), [1, 1]), [0.5, 0])
    with pytest.raises(ValueError):
        lp_maximize(BoxRegion(2), [np.inf, 0])


def _regions():
    rng = np.random.default_rng(0)
    n = 8
    yield BoxRegion(n)
    yield KnapsackPolytope(np.round(rng.random(n) + 0.1, 2), 1.3)
    yield cardinality_polytope(n, 3)
    yield MatroidPolytope(PartitionMatroid(n, [range(4), range(4, 8)], [1, 2]))
    yield MatroidPolytope(GraphicMatroid(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 0), (1, 3), (0, 3)]))


def _random_points(region, rng, count):
    """Random members: shrink random box points until they fit."""
    pts = []
    while len(pts) < count:
        x = rng.random(region.n)
        for scale in (1.0, 0.5, 0.25, 0.1):
            if region.contains(x * scale):
                pts.append(x * scale)
                break
    return pts


@pytest.mark.parametrize("region", list(_regions()), ids=lambda r: type(r).__name__)
def test_lp_beats_random_feasible_points(region):
    rng = np.random.default_rng(1)
    pts = _random_points(region, rng, 1000)
    for _ in range(5):
        w = rng.normal(size=region.n)
        x = lp_maximize(region, w)
        assert region.contains(x)
        best = w @ x
        assert all(w @ p <= best + 1e-9 for p in pts)


def test_union_examples():
    assert matroid_union_independent(UniformMatroid(2, 1), 2, {0, 1})
    assert not matroid_union_independent(UniformMatroid(3, 1), 2, {0, 1, 2})
    pm = PartitionMatroid(3, [[0, 1], [2]], [1, 1])
    assert matroid_union_independent(pm, 2, {0, 1, 2})


def _graph_matroid(seed):
    rng = np.random.default_rng(seed)
    edges = [tuple(int(v) for v in rng.choice(4, 2, replace=False)) for _ in range(6)]
    return GraphicMatroid(4, edges), edges


@pytest.mark.parametrize("seed", range(4))
def test_union_matches_brute_force_partition(seed):
    m, edges = _graph_matroid(seed)
    oracle = OracleMatroid(m.n, lambda S: ref.forest(edges, S))
    for k in (1, 2, 3):
        for S in ref.subsets(range(m.n)):
            expect = ref.splits_into(lambda P: ref.forest(edges, P), k, S)
            assert matroid_union_independent(oracle, k, S) == expect
            if expect:
                parts = partition_into_independent(oracle, k, S)
                assert frozenset().union(*parts) == S
                assert all(ref.forest(edges, P) for P in parts)


def test_union_k1_is_independence():
    m, _ = _graph_matroid(7)
    for mask in range(1 << m.n):
        assert matroid_union_independent(m, 1, mask) == m.is_independent(mask)


@pytest.mark.parametrize("m", [UniformMatroid(6, 2), PartitionMatroid(6, [[0, 1, 2], [3, 4]], [2, 1]),
                               GraphicMatroid(4, [(0, 1), (1, 2), (2, 0), (2, 3), (1, 3), (0, 3)])])
def test_builtin_matroids_are_matroids(m):
    assert verify_matroid(m)


def test_union_rank_table_matches_closed_forms():
    m, edges = _graph_matroid(2)
    for k in (1, 2):
        table = union_rank_table(m, k)
        for mask in range(1 << m.n):
            S = [u for u in range(m.n) if (mask >> u) & 1]
            best = max(len(T) for T in ref.subsets(S) if ref.splits_into(lambda P: ref.forest(edges, P), k, T))
            assert table[mask] == best


def test_infeasibility_examples():
    assert infeasibility_ratio({0, 1}, Cardinality(5, 2)) == 1
    assert infeasibility_ratio(set(range(5)), Cardinality(5, 2)) == 2.5
    assert infeasibility_ratio(set(range(5)), UniformMatroid(5, 2)) == 3
    assert infeasibility_ratio({0, 1}, Knapsack([1, 2, 2], 2)) == 1.5
    assert infeasibility_ratio(set(), UniformMatroid(3, 1)) == 0
    x = np.array([0.5, 0.5, 0.5])
    assert infeasibility_ratio(x, KnapsackPolytope([1, 1, 1], 1)) == pytest.approx(1.5, abs=1e-6)
    with pytest.raises(ValueError):
        infeasibility_ratio({0}, PartitionMatroid(2, [[1]], [1]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=4, max_size=4), st.integers(1, 3))
def test_fractional_ratio_is_smallest_scale(xs, k):
    x = np.array(xs)
    region = MatroidPolytope(UniformMatroid(4, k))
    t = infeasibility_ratio(x, region)
    expect = max(x.sum() / k, x.max())
    assert t == pytest.approx(expect, abs=2e-6)


def test_base_polytope_lp_and_membership():
    pm = PartitionMatroid(4, [[0, 1], [2, 3]], [1, 1])
    poly = MatroidBasePolytope(pm)
    assert not poly.down_closed
    x = lp_maximize(poly, [-1, -2, -3, -1])
    np.testing.assert_array_equal(x, [1, 0, 0, 1])
    assert poly.contains(np.array([0.5, 0.5, 0.5, 0.5]))
    assert not poly.contains(np.array([0.5, 0.0, 0.5, 0.5]))
