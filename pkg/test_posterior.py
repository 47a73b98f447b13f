#!/usr/bin/env python3
"""
Test posterior layer - marginal likelihood, posterior moments, smoothing pmf
"""
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from generators import dirichlet_graph, tridiagonal, wrapped_tridiagonal, validate_generator
from moments import MomentQuery
from numerics import ValidationError, resolvent
from posterior import (
    CountVector, PosteriorQuery, PosteriorSmoother, dirichlet_posterior_mean,
    dirichlet_multinomial_sequence, log_dirichlet_multinomial_sequence, beta_raw_moment
)
from reports import PRESETS, smooth_preset
from loguru import logger

logger.remove()
logger.add(sys.stderr, format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | <level>{message}</level>", level="WARNING")

SMOOTHER = PosteriorSmoother()
ENGINE = SMOOTHER.engine


def brute_posterior_mass(generator, counts, x):
    """p(x | k) as a ratio of brute-force moments"""
    plus = list(counts)
    plus[x] += 1
    numerator = ENGINE.moment_bruteforce(generator, MomentQuery.from_counts(plus))
    denominator = ENGINE.moment_bruteforce(generator, MomentQuery.from_counts(counts))
    return numerator / denominator


def test_count_vector():
    counts = CountVector.from_mapping(5, {0: 2, 3: 1})
    assert counts.counts == (2, 0, 0, 1, 0) and counts.n == 3
    assert np.allclose(counts.empirical(), [2 / 3, 0, 0, 1 / 3, 0])
    assert CountVector.from_observations(3, [0, 2, 2]).counts == (1, 0, 2)
    assert np.array_equal(CountVector.of([0, 0]).empirical(), [0, 0])
    for bad in ([-1, 2], [1.5, 1]):
        try:
            CountVector(tuple(bad))
            assert False, f"expected ValidationError for {bad}"
        except ValidationError:
            pass
    print("[OK] Count vectors")


def test_closed_forms():
    assert np.allclose(dirichlet_posterior_mean([1, 1], [3, 1]), [4 / 6, 2 / 6])
    # Polya urn: a, b, a with alpha = (1, 1): 1/2 * 1/3 * 2/4
    assert abs(dirichlet_multinomial_sequence([1, 1], [2, 1]) - 1 / 12) < 1e-15
    assert abs(beta_raw_moment(2.0, 3.0, 2) - (2 * 3) / (5 * 6)) < 1e-15
    assert beta_raw_moment(2.0, 3.0, 0) == 1.0
    print("[OK] Dirichlet reference formulas")


def test_marginal_likelihood():
    g = tridiagonal(6, 2.0)
    assert SMOOTHER.marginal_likelihood(g, CountVector.of([0] * 6)) == 1.0
    for x in range(6):
        counts = [0] * 6
        counts[x] = 1
        assert abs(SMOOTHER.marginal_likelihood(g, CountVector.of(counts)) - g.mu[x]) < 1e-12

    alpha = np.array([0.4, 1.1, 2.5, 0.9])
    gd = dirichlet_graph(alpha)
    for counts in ([1, 0, 2, 0], [3, 1, 1, 2], [0, 0, 0, 5]):
        value = SMOOTHER.marginal_likelihood(gd, CountVector.of(counts))
        assert abs(value - dirichlet_multinomial_sequence(alpha, counts)) < 1e-12
        log_value = SMOOTHER.log_marginal_likelihood(gd, CountVector.of(counts))
        assert abs(log_value - log_dirichlet_multinomial_sequence(alpha, counts)) < 1e-9
    print("[OK] Marginal likelihood of a data sequence")


def test_posterior_moments():
    alpha = np.array([0.5, 1.5, 2.0])
    g = dirichlet_graph(alpha)
    counts = CountVector.of([2, 0, 1])
    assert SMOOTHER.posterior_moment(g, PosteriorQuery(counts, (0, 0, 0))) == 1.0
    for x in range(3):
        extra = [0, 0, 0]
        extra[x] = 1
        value = SMOOTHER.posterior_moment(g, PosteriorQuery(counts, tuple(extra)))
        assert abs(value - (alpha[x] + counts.counts[x]) / (alpha.sum() + counts.n)) < 1e-12

    gt = wrapped_tridiagonal(5, 1.5)
    rng = np.random.default_rng(3)
    for _ in range(10):
        counts = CountVector.of(rng.integers(0, 3, size=5))
        x = int(rng.integers(0, 5))
        first = [0] * 5
        first[x] = 1
        second = [0] * 5
        second[x] = 2
        m1 = SMOOTHER.posterior_moment(gt, PosteriorQuery(counts, tuple(first)))
        m2 = SMOOTHER.posterior_moment(gt, PosteriorQuery(counts, tuple(second)))
        assert m2 >= m1 ** 2 - 1e-14
        cond = SMOOTHER.posterior_moment(gt, PosteriorQuery(counts, tuple(first), condition_t1=x))
        assert 0.0 < cond < 1.0
    print("[OK] Posterior moments")


def test_posterior_mean_empty_data():
    for g in (tridiagonal(7, 2.0), dirichlet_graph([0.2, 0.3, 1.5]), wrapped_tridiagonal(30, 3.0)):
        pmf = SMOOTHER.posterior_mean_pmf(g, CountVector.of([0] * g.dim))
        assert np.allclose(pmf, g.mu, atol=1e-13)
    print("[OK] No data: posterior mean is mu")


def test_dirichlet_reduction():
    rng = np.random.default_rng(42)
    worst = 0.0
    for case in range(50):
        d = (2, 5, 10)[case % 3]
        theta = (0.5, 4.0, 20.0)[(case // 3) % 3]
        mu = rng.dirichlet(np.ones(d))
        g = dirichlet_graph(theta * mu)
        n = int(rng.integers(0, 13))
        counts = CountVector.from_observations(d, rng.integers(0, d, size=n))
        pmf = SMOOTHER.posterior_mean_pmf(g, counts)
        expected = (theta * mu + counts.as_array()) / (theta + n)
        worst = max(worst, float(np.abs(pmf - expected).max()))
    assert worst <= 1e-10, worst
    print(f"[OK] Dirichlet reduction (theta mu + k)/(theta + n) (max diff {worst:.2e})")


def test_pmf_normalization():
    rng = np.random.default_rng(5)
    for _ in range(30):
        d = int(rng.integers(2, 9))
        adjacency = rng.random((d, d))
        np.fill_diagonal(adjacency, 0.0)
        g = validate_generator(adjacency - np.diag(adjacency.sum(axis=1)))
        n = int(rng.integers(0, 61))
        counts = CountVector.from_observations(d, rng.integers(0, min(d, 4), size=n))
        pmf = SMOOTHER.posterior_mean_pmf(g, counts)
        assert abs(pmf.sum() - 1.0) <= 1e-10
        assert np.all(pmf > 0)
    for preset in PRESETS.values():
        for name, (_, pmf) in smooth_preset(preset, SMOOTHER).items():
            assert abs(pmf.sum() - 1.0) <= 1e-10, (preset.name, name)
    print("[OK] Posterior pmf sums to 1")


def test_pmf_matches_brute_force():
    g = tridiagonal(6, 1.5)
    counts = [2, 0, 1, 0, 0, 1]
    pmf = SMOOTHER.posterior_mean_pmf(g, CountVector.of(counts))
    for x in range(6):
        assert abs(pmf[x] - brute_posterior_mass(g, counts, x)) < 1e-10
    print("[OK] Extended sweep agrees with brute force")


def test_smoothing_property():
    preset = PRESETS['normal']
    counts = preset.count_vector()
    results = smooth_preset(preset, SMOOTHER)
    g2, tridiag = results['G2']
    _, dirichlet = results['G1']
    assert tridiag[10] > tridiag[1]
    assert tridiag[10] > dirichlet[10]
    assert abs(tridiag[10] - brute_posterior_mass(g2, counts.counts, 10)) < 1e-10
    assert abs(tridiag[1] - brute_posterior_mass(g2, counts.counts, 1)) < 1e-10
    w = 2.0 / 29.0
    assert np.allclose(dirichlet, dirichlet_posterior_mean([w] * 30, counts.counts), atol=1e-10)
    print("[OK] Tridiagonal prior smooths mass into empty bin 11")


def test_wrap_around_property():
    results = smooth_preset(PRESETS['wrapped'], SMOOTHER)
    wrapped, unwrapped = results['G2'][1], results['G3'][1]
    assert wrapped[29] > unwrapped[29]
    print("[OK] Wrapped prior moves mass from bin 3 to bin 30")


def test_preset_regression_values():
    normal = smooth_preset(PRESETS['normal'], SMOOTHER)
    # G1 is Dirichlet(2/29, ..., 2/29): (2/29 + k) / (60/29 + 6)
    dirichlet = normal['G1'][1]
    assert abs(dirichlet[9] - 31 / 234) < 1e-10
    assert abs(dirichlet[14] - 60 / 234) < 1e-10
    assert abs(dirichlet[1] - 2 / 234) < 1e-10

    wrapped = smooth_preset(PRESETS['wrapped'], SMOOTHER)
    assert abs(wrapped['G1'][1][2] - 31 / 89) < 1e-10
    # one observation at bin 3: p(y) = E[nu(y) nu(3)] / mu_3, both orders of the pair
    for name in ('G2', 'G3'):
        generator, pmf = wrapped[name]
        r1, r2 = resolvent(generator.matrix, 1), resolvent(generator.matrix, 2)
        mu, x = generator.mu, 2
        for y in (0, 1, 15, 29):
            pair = 0.5 * (mu @ r2[:, y] * r1[y, x] + mu @ r2[:, x] * r1[x, y])
            assert abs(pmf[y] - pair / mu[x]) < 1e-10, (name, y)
    print("[OK] Preset posteriors match pinned closed forms")


def test_consistency_trend():
    eta = np.array([0.1, 0.2, 0.3, 0.4])
    g = tridiagonal(4, 2.0)
    errors = []
    for n in (10, 30, 100):
        counts = CountVector.of(np.round(n * eta).astype(int))
        pmf = SMOOTHER.posterior_mean_pmf(g, counts)
        errors.append(float(np.abs(pmf - eta).max()))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] <= 0.1
    print(f"[OK] Posterior mean approaches eta: {errors}")


def test_given_t1():
    g = tridiagonal(5, 2.0)
    r1 = resolvent(g.matrix, 1)
    for x in range(5):
        pmf = SMOOTHER.posterior_mean_pmf_given_t1(g, CountVector.of([0] * 5), x)
        assert np.allclose(pmf, r1[x], atol=1e-13)

    alpha = np.array([0.6, 1.4, 2.0])
    gd = dirichlet_graph(alpha)
    counts = CountVector.of([1, 0, 2])
    for x in range(3):
        pmf = SMOOTHER.posterior_mean_pmf_given_t1(gd, counts, x)
        assert abs(pmf.sum() - 1.0) < 1e-12
        # the first atom is a size-biased pick, so T_1 = x acts as one more observation of x
        plus = list(counts.counts)
        plus[x] += 1
        assert np.allclose(pmf, dirichlet_posterior_mean(alpha, plus), atol=1e-12)
    print("[OK] Posterior predictive given T_1")


def test_posterior_variance():
    alpha = np.array([0.5, 1.0, 1.5, 2.0])
    g = dirichlet_graph(alpha)
    counts = CountVector.of([1, 3, 0, 2])
    variance = SMOOTHER.posterior_variance(g, counts)
    a = alpha + counts.as_array()
    p = a / a.sum()
    assert np.allclose(variance, p * (1 - p) / (a.sum() + 1), atol=1e-12)
    print("[OK] Posterior variance")


def test_dimension_mismatch():
    try:
        SMOOTHER.posterior_mean_pmf(tridiagonal(4, 1.0), CountVector.of([1, 2, 3]))
        assert False, "expected ValidationError"
    except ValidationError:
        pass
    print("[OK] Dimension mismatch rejected")


if __name__ == '__main__':
    try:
        for name, fn in list(globals().items()):
            if name.startswith('test_') and callable(fn):
                fn()
        print("\n[PASS] ALL POSTERIOR TESTS PASSED!")
        sys.exit(0)
    except Exception as e:
        print(f"\n[FAIL] TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
