import itertools

import numpy as np
import pytest

import reference as ref
from bicriteria.core import SetFunction, to_mask
from bicriteria.functions import DirectedCut, Modular, random_coverage, random_graph
from bicriteria.multilinear import MultilinearExtension, default_samples


def arc():
    return DirectedCut(2, ((0, 1, 1.0),)).build()[0]


def test_eval_examples():
    F = MultilinearExtension(arc())
    assert F([0.5, 0.5]) == pytest.approx(0.25)
    assert F([1.0, 0.0]) == 1
    assert F([0.0, 0.0]) == 0


def test_partial_and_gradient_examples():
    F = MultilinearExtension(arc())
    assert F.partial([0.0, 0.5], 0) == pytest.approx(0.5)
    np.testing.assert_allclose(F.gradient([0.3, 0.4]), [0.6, -0.3])
    w = (0.5, 2.0, 1.5)
    M = MultilinearExtension(Modular(w).build()[0])
    np.testing.assert_allclose(M.gradient([0.1, 0.9, 0.4]), w)
    const = MultilinearExtension(SetFunction(3, lambda m: 2.0))
    np.testing.assert_allclose(const.gradient([0.2, 0.2, 0.2]), 0.0, atol=1e-12)


def test_exact_rejects_large_ground_set():
    with pytest.raises(ValueError):
        MultilinearExtension(SetFunction(25, lambda m: 0.0))
    with pytest.raises(ValueError):
        MultilinearExtension(arc())([1.2, 0.0])


def _instances(count, n_max=10, seed=0):
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(3, n_max + 1))
        if i % 3 == 0:
            f = random_coverage(n, n + 3, int(rng.integers(1 << 30))).build()[0]
        else:
            f = random_graph(n, 0.5, int(rng.integers(1 << 30)), directed=i % 3 == 2).build()[0]
        yield f, rng.random(n)


def test_exact_matches_naive_sum():
    for f, x in _instances(15, n_max=7):
        F = MultilinearExtension(f)
        assert F(x) == pytest.approx(ref.multilinear(lambda S: f(to_mask(S)), x), abs=1e-10)


def test_sampled_within_three_sigma():
    misses = 0
    for i, (f, x) in enumerate(_instances(100, seed=1)):
        exact = MultilinearExtension(f)(x)
        est, err = MultilinearExtension(f, "sampled", samples=20000, seed=i).eval_with_error(x)
        if abs(est - exact) > 3 * err + 1e-12:
            misses += 1
    # a 3 sigma band misses about 0.3% of the time
    assert misses <= 2


def test_sampled_is_seed_deterministic():
    f = random_coverage(6, 8, 3).build()[0]
    x = np.full(6, 0.3)
    a = MultilinearExtension(f, "sampled", samples=500, seed=9)
    b = MultilinearExtension(f, "sampled", samples=500, seed=9)
    assert a(x) == b(x)
    np.testing.assert_array_equal(a.gradient(x), b.gradient(x))


def test_partial_matches_central_difference():
    rng = np.random.default_rng(5)
    for f, _ in _instances(10, n_max=8, seed=2):
        F = MultilinearExtension(f)
        x = 0.1 + 0.8 * rng.random(f.n)
        g = F.gradient(x)
        for u in range(f.n):
            fd = ref.central_difference(F, x, u)
            assert F.partial(x, u) == pytest.approx(fd, abs=1e-6)
            assert g[u] == pytest.approx(F.partial(x, u), abs=1e-12)


def test_partial_independent_of_own_coordinate():
    f = random_graph(6, 0.6, 4).build()[0]
    F = MultilinearExtension(f)
    x = np.linspace(0.1, 0.9, 6)
    for u in range(6):
        flipped = x.copy()
        flipped[u] = 1 - x[u]
        assert F.partial(x, u) == pytest.approx(F.partial(flipped, u), abs=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_dr_submodularity_on_grid(seed):
    n = 4
    f = random_graph(n, 0.7, seed, directed=seed % 2 == 1).build()[0]
    F = MultilinearExtension(f)
    levels = (0.0, 0.5, 1.0)
    points = [np.array(p) for p in itertools.product(levels, repeat=n)]
    grads = {tuple(p): F.gradient(p) for p in points}
    for x in points:
        for y in points:
            if np.all(x <= y):
                assert np.all(grads[tuple(x)] >= grads[tuple(y)] - 1e-9)


def test_symmetric_derivative_identity():
    for n in (5, 8):
        f = random_graph(n, 0.5, n).build()[0]
        F = MultilinearExtension(f)
        y = np.random.default_rng(n).random(n)
        np.testing.assert_allclose(F.gradient(1 - y), -F.gradient(y), atol=1e-10)


def test_default_samples():
    assert default_samples(2) == 1000
    assert default_samples(1000) == int(np.ceil(10 * 1000 * np.log(1000)))
