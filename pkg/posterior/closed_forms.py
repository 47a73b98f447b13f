"""Dirichlet reference formulas used to check the MSB posterior in the Dirichlet case."""
from typing import Sequence

import numpy as np
from scipy.special import gammaln


def dirichlet_posterior_mean(alpha: Sequence[float], counts: Sequence[int]) -> np.ndarray:
    """(alpha + k) / (sum(alpha) + n), i.e. (theta mu + f) / (theta + n)"""
    alpha = np.asarray(alpha, dtype=float)
    counts = np.asarray(counts, dtype=float)
    return (alpha + counts) / (alpha.sum() + counts.sum())


def log_dirichlet_multinomial_sequence(alpha: Sequence[float], counts: Sequence[int]) -> float:
    """log P(Y^n = y^n) for one ordered sequence with the given counts (Polya urn)"""
    alpha = np.asarray(alpha, dtype=float)
    counts = np.asarray(counts, dtype=float)
    return float(
        (gammaln(alpha + counts) - gammaln(alpha)).sum()
        + gammaln(alpha.sum()) - gammaln(alpha.sum() + counts.sum())
    )


def dirichlet_multinomial_sequence(alpha: Sequence[float], counts: Sequence[int]) -> float:
    return float(np.exp(log_dirichlet_multinomial_sequence(alpha, counts)))


def beta_raw_moment(a: float, b: float, k: int) -> float:
    """E[X^k] for X ~ Beta(a, b): prod_{i<k} (a + i) / (a + b + i)"""
    value = 1.0
    for i in range(k):
        value *= (a + i) / (a + b + i)
    return value
