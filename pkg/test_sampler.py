#!/usr/bin/env python3
"""
Test sampler - seeded streams, GEM sticks, chains, truncated measures, Monte Carlo
"""
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from generators import (
    GeneratorValidationError, from_adjacency, to_transition_kernel, tridiagonal, validate_generator
)
from moments import MomentEngine, MomentQuery
from numerics import ValidationError
from sampler import (
    MonteCarloSampler, RngStream, RunningMoments, TruncatedMeasure, sample_chain, sample_chains,
    sample_data, sample_gem, sample_msb, sample_msb_batch
)
from loguru import logger

logger.remove()
logger.add(sys.stderr, format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | <level>{message}</level>", level="WARNING")

ENGINE = MomentEngine()
Z = 3.0


def test_streams():
    a = RngStream(123).random(5)
    b = RngStream(123).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, RngStream(124).random(5))
    root = RngStream(9)
    assert np.array_equal(root.for_batch(3).random(4), RngStream(9, (3,)).random(4))
    assert not np.array_equal(root.for_batch(0).random(4), root.for_batch(1).random(4))
    assert RngStream(2 ** 64 - 1).seed == 2 ** 64 - 1
    for bad in (-1, 2 ** 64, 1.5, True):
        try:
            RngStream(bad)
            assert False, f"expected ValidationError for seed {bad!r}"
        except ValidationError:
            pass
    assert 'philox' in repr(root)
    print("[OK] Seeded streams are reproducible and independent per batch")


def test_running_moments():
    values = np.random.default_rng(0).normal(3.0, 2.0, size=1000)
    stats = RunningMoments()
    for chunk in np.array_split(values, 7):
        stats.merge(chunk)
    assert stats.count == 1000
    assert abs(stats.mean - values.mean()) < 1e-12
    assert abs(stats.m2 - ((values - values.mean()) ** 2).sum()) < 1e-9
    assert abs(stats.standard_error - values.std(ddof=1) / np.sqrt(1000)) < 1e-12
    print("[OK] Batch statistics merge exactly")


def test_gem_weights():
    weights, residual = sample_gem(2.0, 1e-12, RngStream(1))
    assert np.all(weights > 0)
    assert 0 <= residual < 1e-12
    assert abs(weights.sum() + residual - 1.0) < 1e-12

    rng = RngStream(2)
    first = np.array([sample_gem(2.0, 1e-6, rng)[0][0] for _ in range(20000)])
    se = first.std(ddof=1) / np.sqrt(first.size)
    assert abs(first.mean() - 1.0 / 3.0) < Z * se

    small = np.array([sample_gem(0.01, 1e-6, rng)[0][0] for _ in range(1000)])
    assert small.mean() > 0.95

    for bad in (lambda: sample_gem(0.0, 1e-6, rng), lambda: sample_gem(1.0, 0.0, rng),
                lambda: sample_gem(1.0, 1.0, rng)):
        try:
            bad()
            assert False, "expected ValidationError"
        except ValidationError:
            pass
    print("[OK] GEM weights: E[P_1] = 1/(1 + theta)")


def test_chain_stationarity():
    g = from_adjacency([[0.0, 1.0], [2.0, 0.0]])
    kernel = to_transition_kernel(g, g.theta_G)
    states = sample_chains(kernel, g.mu, 5, 200000, RngStream(3))
    freq = np.bincount(states[:, 4], minlength=2) / states.shape[0]
    assert np.allclose(freq, g.mu, atol=0.01)

    fixed = sample_chains(kernel, g.mu, 3, 10, RngStream(3), start=1)
    assert np.all(fixed[:, 0] == 1)
    assert sample_chains(kernel, g.mu, 0, 4, RngStream(3)).shape == (4, 0)
    print("[OK] Chain started from mu stays stationary")


def test_sample_msb_deterministic():
    g = tridiagonal(5, 1.0)
    first = sample_msb(g, RngStream(42))
    second = sample_msb(g, RngStream(42))
    assert first == second
    assert first != sample_msb(g, RngStream(43))
    assert abs(first.total_mass - 1.0) < 1e-12
    vector = first.to_vector(5)
    assert abs(vector.sum() - 1.0) < 1e-12 and np.all(vector >= 0)
    assert first.residual < 1e-12
    assert sample_msb(g, RngStream(42), start=3).first_state == 3
    print("[OK] Same seed gives the same truncated measure")


def test_sample_msb_theta():
    g = tridiagonal(4, 1.0)
    try:
        sample_msb(g, RngStream(1), theta=1.5)
        assert False, "expected GeneratorValidationError"
    except GeneratorValidationError:
        pass
    measure = sample_msb(g, RngStream(1), theta=50.0, eps=1e-6)
    assert abs(measure.total_mass - 1.0) < 1e-12
    single = sample_msb(validate_generator([[0.0]]), RngStream(1))
    assert set(c for c, _ in single.atoms) <= {0}
    print("[OK] theta >= theta^G enforced, one-category generator samples point mass")


def test_sample_msb_batch():
    g = tridiagonal(6, 2.0)
    nu, first = sample_msb_batch(g, 500, RngStream(5))
    assert nu.shape == (500, 6) and first.shape == (500,)
    assert np.abs(nu.sum(axis=1) - 1.0).max() < 1e-12
    assert np.all(nu >= 0)
    again, _ = sample_msb_batch(g, 500, RngStream(5))
    assert np.array_equal(nu, again)
    nu_fixed, first_fixed = sample_msb_batch(g, 50, RngStream(5), start=2)
    assert np.all(first_fixed == 2)
    assert np.all(nu_fixed[:, 2] > 0)
    print("[OK] Batched measures sum to 1 and are reproducible")


def test_sample_data():
    g = tridiagonal(4, 1.0)
    measure = sample_msb(g, RngStream(8))
    assert sample_data(measure, 0, RngStream(8)) == []
    data = sample_data(measure, 200, RngStream(8))
    assert len(data) == 200 and all(0 <= y < 4 for y in data)
    point = TruncatedMeasure(atoms=((2, 1.0),), residual=0.0, residual_state=0, first_state=2)
    assert sample_data(point, 25, RngStream(1)) == [2] * 25
    try:
        sample_data(point, -1, RngStream(1))
        assert False, "expected ValidationError"
    except ValidationError:
        pass
    print("[OK] Data drawn from a truncated measure")


def test_mc_moment_edge_cases():
    g = tridiagonal(3, 1.0)
    mc = MonteCarloSampler()
    assert mc.mc_moment_estimate(g, MomentQuery.from_counts([0, 0, 0]), 10, seed=1) == (1.0, 0.0)
    try:
        mc.mc_moment_estimate(g, MomentQuery.from_counts([1, 0, 0]), 1, seed=1)
        assert False, "expected ValidationError"
    except ValidationError:
        pass
    print("[OK] Empty query is exactly 1, N < 2 rejected")


def test_mc_matches_exact_moments():
    g = tridiagonal(3, 1.0)
    mc = MonteCarloSampler()
    for x in range(2):
        for k in (1, 2):
            query = MomentQuery.from_singletons({x: k})
            estimate, se = mc.mc_moment_estimate(g, query, 1_000_000, seed=100 + 10 * x + k)
            exact = ENGINE.moment_unconditional(g, query)
            assert abs(estimate - exact) <= Z * se, (x, k, estimate, exact, se)
    print("[OK] Monte Carlo agrees with exact first and second moments")


def test_mc_conditional_moment():
    g = tridiagonal(2, 1.0)
    mc = MonteCarloSampler({'sampler': {'batch_size': 20000}})
    query = MomentQuery.from_singletons({0: 1})
    estimate, se = mc.mc_moment_estimate(g, query, 200000, seed=77, x=0)
    exact = ENGINE.moment_conditional(g, query, 0)
    assert abs(exact - 2.0 / 3.0) < 1e-12
    assert abs(estimate - exact) <= Z * se
    print("[OK] Monte Carlo conditional moment given T_1")


def test_support_coverage():
    g = tridiagonal(3, 1.0)
    mc = MonteCarloSampler()
    targets = [g.mu, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    assert mc.support_coverage(g, targets, 1.0, 1000, seed=4) == [1000] * 4

    hits = mc.support_coverage(g, targets, 0.2, 200000, seed=4)
    assert hits[0] > 0
    vertex_hits = mc.support_coverage(g, targets[1:], 0.1, 1_000_000, seed=5)
    assert min(vertex_hits) > 0
    try:
        mc.support_coverage(g, [[0.5, 0.5]], 0.1, 10, seed=4)
        assert False, "expected ValidationError"
    except ValidationError:
        pass
    print(f"[OK] Support coverage: mu {hits[0]}, vertices {vertex_hits}")


def test_constant_kernel_gives_independent_states():
    p = np.array([0.2, 0.5, 0.3])
    kernel = np.tile(p, (3, 1))
    states = np.array(sample_chain(kernel, p, 100000, RngStream(61)))
    assert len(states) == 100000
    assert np.allclose(np.bincount(states, minlength=3) / states.size, p, atol=0.01)
    for x in range(3):
        hit = (states == x).astype(float)
        r = np.corrcoef(hit[:-1], hit[1:])[0, 1]
        assert abs(r) * np.sqrt(hit.size - 1) <= Z, (x, r)
    print("[OK] Constant-row kernel: lag-1 correlation within noise")


def test_two_state_transition_frequencies():
    kernel = np.array([[0.7, 0.3], [0.4, 0.6]])
    mu = np.array([4.0, 3.0]) / 7.0
    states = np.array(sample_chain(kernel, mu, 100000, RngStream(62)))
    source, target = states[:-1], states[1:]
    for x in range(2):
        leaving = target[source == x]
        rate = np.mean(leaving != x)
        expected = kernel[x, 1 - x]
        se = np.sqrt(expected * (1 - expected) / leaving.size)
        assert abs(rate - expected) <= Z * se, (x, rate, expected)
    assert sample_chain(kernel, mu, 4, RngStream(62), start=1)[0] == 1
    print("[OK] Two-state transition frequencies match Q")


def test_law_does_not_depend_on_theta():
    g = tridiagonal(3, 1.0)
    query = MomentQuery.from_singletons({0: 2})
    exact = ENGINE.moment_unconditional(g, query)
    estimates = []
    for index, theta in enumerate((g.theta_G, 3.0 * g.theta_G)):
        nu, _ = sample_msb_batch(g, 100000, RngStream(60, (index,)), theta=theta, eps=1e-10)
        values = nu[:, 0] ** 2
        se = values.std(ddof=1) / np.sqrt(values.size)
        assert abs(values.mean() - exact) <= Z * se, (theta, values.mean(), exact, se)
        estimates.append((values.mean(), se))
    (low, low_se), (high, high_se) = estimates
    assert abs(low - high) <= Z * np.hypot(low_se, high_se)
    print("[OK] E[nu(x)^2] agrees for theta = theta^G and 3 theta^G")


if __name__ == '__main__':
    try:
        for name, fn in list(globals().items()):
            if name.startswith('test_') and callable(fn):
                fn()
        print("\n[PASS] ALL SAMPLER TESTS PASSED!")
        sys.exit(0)
    except Exception as e:
        print(f"\n[FAIL] TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
