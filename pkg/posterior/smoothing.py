"""
Posterior moments of an MSB(G) prior given multinomial counts, and the
posterior-mean pmf used for histogram smoothing.

Posterior moments are ratios of prior moments (size-biasing by the data):
    E[prod nu(w)^{l_w} | Y^n] = E[prod nu(w)^{k_w + l_w}] / E[prod nu(w)^{k_w}]
and depend on the data only through the counts k.
"""
import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from generators import GeneratorMatrix
from moments import MomentEngine, MomentQuery, QueryError
from numerics import ValidationError, NumericalConsistencyError


@dataclass(frozen=True)
class CountVector:
    """Observed multinomial counts k over the d categories"""
    counts: Tuple[int, ...]

    def __post_init__(self):
        for k in self.counts:
            if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
                raise ValidationError(f"counts must be nonnegative integers, got {k!r}")

    @classmethod
    def of(cls, counts: Sequence[int]) -> 'CountVector':
        return cls(tuple(int(k) for k in counts))

    @classmethod
    def from_mapping(cls, dim: int, counts: Mapping[int, int]) -> 'CountVector':
        """Counts from a sparse {0-based category: count} mapping; missing categories are 0"""
        values = [0] * dim
        for x, k in counts.items():
            if not 0 <= x < dim:
                raise ValidationError(f"category {x + 1} outside 1..{dim}")
            values[x] += int(k)
        return cls.of(values)

    @classmethod
    def from_observations(cls, dim: int, observations: Sequence[int]) -> 'CountVector':
        """Tally a data sequence of 0-based categories"""
        return cls.of(np.bincount(np.asarray(observations, dtype=int), minlength=dim)[:dim])

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def n(self) -> int:
        return int(sum(self.counts))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float)

    def empirical(self) -> np.ndarray:
        """Empirical pmf k / n (zeros when n = 0)"""
        arr = self.as_array()
        return arr / self.n if self.n else np.zeros(self.dim)


@dataclass(frozen=True)
class PosteriorQuery:
    """Posterior moment E[prod_w nu(w)^{l_w} | Y^n (, T_1 = x)]"""
    counts: CountVector
    extra: Tuple[int, ...]
    condition_t1: Optional[int] = None

    def __post_init__(self):
        if len(self.extra) != self.counts.dim:
            raise ValidationError("extra exponents must have one entry per category")
        CountVector.of(self.extra)
        if self.condition_t1 is not None and not 0 <= self.condition_t1 < self.counts.dim:
            raise ValidationError(f"category {self.condition_t1 + 1} outside 1..{self.counts.dim}")


class PosteriorSmoother:
    """Posterior summaries of MSB(G) given count data"""

    def __init__(self, config: Optional[Dict[str, Any]] = None, engine: Optional[MomentEngine] = None):
        """
        Initialize posterior smoother

        Args:
            config: Configuration dictionary
            engine: Moment engine to share (built from config when omitted)
        """
        self.config = config or {}
        self.engine = engine or MomentEngine(self.config)
        self.tolerance = self.config.get('numerics', {}).get('stochastic_tolerance', 1e-10)

    @staticmethod
    def _check_dims(generator: GeneratorMatrix, counts: CountVector):
        if counts.dim != generator.dim:
            raise ValidationError(f"counts have {counts.dim} categories, generator has {generator.dim}")

    def log_marginal_likelihood(self, generator: GeneratorMatrix, counts: CountVector) -> float:
        """log P(Y^n = y^n) for any ordered sequence with these counts"""
        self._check_dims(generator, counts)
        if counts.n == 0:
            return 0.0
        return self.engine.log_moment_unconditional(generator, MomentQuery.from_counts(counts.counts))

    def marginal_likelihood(self, generator: GeneratorMatrix, counts: CountVector) -> float:
        """P(Y^n = y^n) = E[prod_x nu(x)^{k_x}]; 1 for empty data"""
        return math.exp(self.log_marginal_likelihood(generator, counts))

    def posterior_moment(self, generator: GeneratorMatrix, query: PosteriorQuery) -> float:
        """
        Ratio of joint moments E[nu^{k+l} | A] / E[nu^k | A]

        The normalized prior moments already include the #S(k)/#S(k+l) factor,
        A is {T_1 = x} when condition_t1 is set, otherwise the stationary start.
        """
        counts = query.counts
        self._check_dims(generator, counts)
        if not any(query.extra):
            return 1.0
        numerator = MomentQuery.from_counts([k + l for k, l in zip(counts.counts, query.extra)])
        denominator = MomentQuery.from_counts(counts.counts)
        x = query.condition_t1
        if x is None:
            log_num = self.engine.log_moment_unconditional(generator, numerator)
            log_den = self.engine.log_moment_unconditional(generator, denominator)
        else:
            log_num = self.engine.log_moment_conditional(generator, numerator, x)
            log_den = self.engine.log_moment_conditional(generator, denominator, x)
        if log_den == -math.inf:
            raise NumericalConsistencyError("marginal likelihood underflowed to zero")
        if log_num == -math.inf:
            return 0.0
        return math.exp(log_num - log_den)

    def _numerators(self, generator: GeneratorMatrix, counts: CountVector):
        self._check_dims(generator, counts)
        result = self.engine.sweep(generator, MomentQuery.from_counts(counts.counts), extend=True)
        # #S(k) / #S(k + e_x) = (k_x + 1) / (n + 1)
        ratio = (counts.as_array() + 1.0) / (counts.n + 1.0)
        return result, ratio

    def _check_pmf(self, pmf: np.ndarray) -> np.ndarray:
        drift = abs(pmf.sum() - 1.0)
        if drift > self.tolerance:
            raise NumericalConsistencyError(f"posterior pmf sums to 1 {drift:+.3e}")
        return pmf

    def posterior_mean_pmf(self, generator: GeneratorMatrix, counts: CountVector) -> np.ndarray:
        """
        p(x | k) = [#S(k) / #S(k + e_x)] mu^T U(k + e_x) / mu^T U(k)

        All d numerators come from one extended DP sweep.
        """
        result, ratio = self._numerators(generator, counts)
        denominator = float(generator.mu @ result.vector)
        pmf = ratio * (generator.mu @ result.extension) / denominator
        logger.debug(f"Posterior mean pmf for n={counts.n}, d={generator.dim}")
        return self._check_pmf(pmf)

    def posterior_mean_pmf_given_t1(self, generator: GeneratorMatrix, counts: CountVector, x: int) -> np.ndarray:
        """Posterior predictive conditional on T_1 = x: rooted at e_x^T instead of mu^T"""
        if not 0 <= x < generator.dim:
            raise QueryError(f"category {x + 1} outside 1..{generator.dim}")
        result, ratio = self._numerators(generator, counts)
        if result.vector[x] <= 0:
            raise NumericalConsistencyError("conditional marginal likelihood underflowed to zero")
        pmf = ratio * result.extension[x, :] / result.vector[x]
        return self._check_pmf(pmf)

    def posterior_variance(self, generator: GeneratorMatrix, counts: CountVector) -> np.ndarray:
        """Var[nu(x) | Y^n] from the posterior first and second moments"""
        mean = self.posterior_mean_pmf(generator, counts)
        second = np.empty(generator.dim)
        for x in range(generator.dim):
            extra = [0] * generator.dim
            extra[x] = 2
            second[x] = self.posterior_moment(generator, PosteriorQuery(counts, tuple(extra)))
        return np.maximum(second - mean ** 2, 0.0)
