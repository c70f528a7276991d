import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicriteria.constraints import Cardinality, Knapsack, UniformMatroid
from bicriteria.core import (
    Instance,
    SetFunction,
    augment_with_dummies,
    hadamard,
    join,
    marginal,
    meet,
    members,
    prob_sum,
    to_mask,
)
from bicriteria.functions import Coverage, DirectedCut, Modular, random_coverage, random_graph


def test_marginal_examples():
    f, _ = Modular((1.0, 1.0, 1.0)).build()
    assert marginal(f, set(), 0) == 1
    arc, _ = DirectedCut(2, ((0, 1, 1.0),)).build()
    assert marginal(arc, {1}, 0) == 0
    assert marginal(arc, {0}, 0) == 0
    with pytest.raises(IndexError):
        marginal(f, set(), 3)


def test_cache_counts_distinct_queries():
    f, _ = Modular((1.0, 2.0)).build()
    f({0})
    f({0})
    f(0b01)
    assert f.queries == 1
    f.marginal({0}, 1)
    assert f.queries == 2
    assert f.fresh().queries == 0


def test_vector_ops():
    x = np.array([0.5, 0.2])
    y = np.array([0.5, 0.5])
    np.testing.assert_allclose(prob_sum(x, y), [0.75, 0.6])
    np.testing.assert_array_equal(prob_sum(x, np.zeros(2)), x)
    np.testing.assert_array_equal(prob_sum(x, np.ones(2)), np.ones(2))
    np.testing.assert_array_equal(join(x, y), [0.5, 0.5])
    np.testing.assert_array_equal(meet(x, y), [0.5, 0.2])
    np.testing.assert_allclose(hadamard(x, y), [0.25, 0.1])
    with pytest.raises(ValueError):
        join(x, np.zeros(3))


unit = st.floats(0, 1, allow_nan=False)


@given(st.lists(st.tuples(unit, unit, unit), min_size=1, max_size=8))
def test_prob_sum_associative_commutative(rows):
    x, y, z = (np.array(c) for c in zip(*rows))
    np.testing.assert_allclose(prob_sum(x, y), prob_sum(y, x), atol=1e-12)
    np.testing.assert_allclose(prob_sum(prob_sum(x, y), z), prob_sum(x, prob_sum(y, z)), atol=1e-12)
    assert np.all(prob_sum(x, y) <= 1 + 1e-12)


def _families():
    yield random_coverage(8, 10, 1).build()[0]
    yield random_graph(8, 0.5, 2).build()[0]
    yield random_graph(8, 0.5, 3, directed=True).build()[0]
    yield Modular(tuple(np.linspace(0, 1, 8))).build()[0]


@pytest.mark.parametrize("f", list(_families()), ids=lambda f: f.name)
def test_diminishing_returns_exhaustive(f):
    n = f.n
    for S in range(1 << n):
        for T in range(1 << n):
            if S & ~T:
                continue
            for u in range(n):
                if (T >> u) & 1:
                    continue
                assert marginal(f, S, u) >= marginal(f, T, u) - 1e-9


def test_augment_knapsack_dummy_price():
    f, _ = Modular((1.0, 1.0)).build()
    aug = augment_with_dummies(Instance(f, Knapsack([1, 1], 2)), 1)
    assert aug.constraint.prices[2] == 2
    assert aug.f({2}) == 0
    assert aug.dummies == 1


def test_augment_zero_is_identity():
    f, _ = Modular((1.0, 2.0)).build()
    con = Cardinality(2, 1)
    aug = augment_with_dummies(Instance(f, con), 0)
    assert aug.f is f and aug.constraint is con
    with pytest.raises(ValueError):
        augment_with_dummies(Instance(f, con), -1)


def test_augment_matroid_dummies_free_up_to_rank():
    f, _ = Modular((1.0, 1.0, 1.0)).build()
    aug = augment_with_dummies(Instance(f, UniformMatroid(3, 2)), 4)
    m = aug.constraint
    assert m.is_independent({0, 3})
    assert m.is_independent({3, 4})
    assert not m.is_independent({3, 4, 5})
    assert not m.is_independent({0, 1, 2})


@settings(max_examples=50)
@given(st.integers(0, 2**6 - 1), st.integers(0, 5))
def test_strip_restores_original(mask, count):
    f, _ = Modular((1.0,) * 6).build()
    aug = augment_with_dummies(Instance(f, Cardinality(6, 2)), count)
    assert aug.strip(mask) == frozenset(members(mask))
    assert aug.f(mask | (((1 << count) - 1) << 6)) == f(mask)


def test_from_sets_wrapper():
    f = SetFunction.from_sets(3, lambda S: len(S) ** 2)
    assert f({0, 2}) == 4
    assert to_mask({0, 2}) == 0b101
