"""
Exact moments of the Markovian stick-breaking measure.

Three independent evaluations of E[prod_j nu(A_j)^{k_j} | T_1 = x]:
  - a level-synchronous dynamic program over the multiset lattice l <= k,
    U(l) = sum_{i: l_i >= 1} R_{|l|} D(A_i) U(l - e_i), U(0) = 1;
  - literal enumeration of the distinct permutations (test oracle);
  - the theta-dependent recursion on v(k, A), whose result must not depend on theta.
Every value is U(k) / #S(k).
"""
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.special import gammaln

from generators import GeneratorMatrix, to_transition_kernel
from numerics import NumericalConsistencyError
from .query import (
    MomentQuery, QueryError, count_distinct_permutations, log_count_distinct_permutations,
    distinct_permutations, lattice_states
)
from .resolvents import ResolventCache, resolvent_cache

BRUTE_FORCE_CAP = 1_000_000
LOG_GAMMA_SPREAD_LIMIT = 700.0
LN2 = math.log(2.0)


@dataclass
class SweepResult:
    """
    Output of one lattice sweep; true values are stored values times exp(log_scale)

    vector: U(k), unnormalized sum over distinct permutations
    extension: d x d matrix whose column x is U(k + e_x), or None
    """
    vector: np.ndarray
    log_scale: float
    extension: Optional[np.ndarray] = None


def _rescale(arrays: Iterable[np.ndarray]) -> int:
    """Divide arrays in place by a power of two bringing their max into [0.5, 1); return the exponent"""
    arrays = list(arrays)
    peak = max(float(a.max()) for a in arrays)
    if peak <= 0.0 or not math.isfinite(peak):
        return 0
    exponent = math.frexp(peak)[1]
    for a in arrays:
        np.ldexp(a, -exponent, out=a)
    return exponent


class MomentEngine:
    """Computes prior moments of MSB(G) for moment queries"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        """
        Initialize moment engine

        Args:
            config: Configuration dictionary (uses 'moments' and 'numerics' sections)
        """
        self.config = config or {}
        self.brute_force_cap = int(self.config.get('moments', {}).get('brute_force_cap', BRUTE_FORCE_CAP))
        self.spread_limit = float(self.config.get('moments', {}).get('log_gamma_spread_limit',
                                                                     LOG_GAMMA_SPREAD_LIMIT))
        logger.debug(f"Moment engine initialized (brute force cap {self.brute_force_cap})")

    def resolvents(self, generator: GeneratorMatrix) -> ResolventCache:
        return resolvent_cache(generator, self.config)

    @staticmethod
    def _check_category(generator: GeneratorMatrix, x: int):
        if not 0 <= x < generator.dim:
            raise QueryError(f"category {x + 1} outside 1..{generator.dim}")

    # ==================== LATTICE DYNAMIC PROGRAM ====================

    def sweep(self, generator: GeneratorMatrix, query: MomentQuery, extend: bool = False) -> SweepResult:
        """
        Run the level-synchronous DP up to level k

        Only levels j-1 and j are held at once. With extend=True every state also
        carries C(l) with column x equal to U(l + e_x), which needs singleton sets.

        Args:
            generator: Validated generator
            query: Moment query (zero exponents are dropped first)
            extend: Also produce the one-extra-observation vectors

        Returns:
            SweepResult for U(k)
        """
        query = query.reduced()
        d = generator.dim
        masks = query.masks(d)
        bounds = query.exponents
        n = len(bounds)
        total = query.total

        categories: List[int] = []
        if extend:
            if any(len(members) != 1 for members in query.sets):
                raise QueryError("extension sweep needs singleton sets")
            categories = [next(iter(members)) for members in query.sets]

        cache = self.resolvents(generator).ensure(total + (1 if extend else 0))
        diagonal = np.arange(d)

        prev_index: Dict[Tuple[int, ...], int] = {(0,) * n: 0}
        u_prev = np.ones((1, d))
        c_prev = cache[1].copy()[None, :, :] if extend else None
        log_scale = 0.0

        for level in range(1, total + 1):
            states = sorted({
                s[:i] + (s[i] + 1,) + s[i + 1:]
                for s in prev_index for i in range(n) if s[i] < bounds[i]
            })
            m = len(states)
            w = np.zeros((m, d))
            companion = np.zeros((m, d, d)) if extend else None
            for i in range(n):
                rows, preds = [], []
                for t, s in enumerate(states):
                    if s[i] >= 1:
                        rows.append(t)
                        preds.append(prev_index[s[:i] + (s[i] - 1,) + s[i + 1:]])
                if not rows:
                    continue
                w[rows] += masks[i] * u_prev[preds]
                if extend:
                    c = categories[i]
                    companion[rows, c, :] += c_prev[preds, c, :]
            u = w @ cache[level].T
            arrays = [u]
            if extend:
                companion[:, diagonal, diagonal] = u
                c_next = np.matmul(cache[level + 1], companion)
                arrays.append(c_next)
            log_scale += _rescale(arrays) * LN2

            prev_index = {s: t for t, s in enumerate(states)}
            u_prev = u
            if extend:
                c_prev = c_next

        return SweepResult(
            vector=u_prev[0].copy(),
            log_scale=log_scale,
            extension=c_prev[0].copy() if extend else None
        )

    # ==================== PUBLIC MOMENTS ====================

    def log_moment_vector(self, generator: GeneratorMatrix, query: MomentQuery) -> Tuple[np.ndarray, float]:
        """
        Conditional moments in split form: v(k, A) = vector * exp(log_factor)

        Returns:
            (vector, log_factor) with the #S(k) normalization folded into log_factor
        """
        query = query.reduced()
        if query.total == 0:
            return np.ones(generator.dim), 0.0
        result = self.sweep(generator, query)
        return result.vector, result.log_scale - log_count_distinct_permutations(query.exponents)

    def moment_vector(self, generator: GeneratorMatrix, query: MomentQuery) -> np.ndarray:
        """v(k, A) = (E[prod nu(A_j)^{k_j} | T_1 = x])_x"""
        vector, log_factor = self.log_moment_vector(generator, query)
        return vector * math.exp(log_factor)

    def moment_conditional(self, generator: GeneratorMatrix, query: MomentQuery, x: int) -> float:
        """E[prod_j nu(A_j)^{k_j} | T_1 = x]; exactly 1 for an all-zero exponent vector"""
        self._check_category(generator, x)
        if query.total == 0:
            return 1.0
        vector, log_factor = self.log_moment_vector(generator, query)
        if vector[x] <= 0:
            return 0.0
        return math.exp(math.log(vector[x]) + log_factor)

    def moment_unconditional(self, generator: GeneratorMatrix, query: MomentQuery) -> float:
        """E[prod_j nu(A_j)^{k_j}] = mu^T v(k, A)"""
        if query.total == 0:
            return 1.0
        value = self.log_moment_unconditional(generator, query)
        return 0.0 if value == -math.inf else math.exp(value)

    def log_moment_conditional(self, generator: GeneratorMatrix, query: MomentQuery, x: int) -> float:
        self._check_category(generator, x)
        vector, log_factor = self.log_moment_vector(generator, query)
        return math.log(vector[x]) + log_factor if vector[x] > 0 else -math.inf

    def log_moment_unconditional(self, generator: GeneratorMatrix, query: MomentQuery) -> float:
        vector, log_factor = self.log_moment_vector(generator, query)
        weighted = float(generator.mu @ vector)
        return math.log(weighted) + log_factor if weighted > 0 else -math.inf

    def single_set_moment(self, generator: GeneratorMatrix, members: Iterable[int], k: int, x: int) -> float:
        """
        E[nu(A)^k | T_1 = x] = e_x^T prod_{j=1}^k (R_j D(A)) 1

        Args:
            generator: Validated generator
            members: Categories of A (0-based)
            k: Exponent >= 0
            x: Conditioning first state (0-based)
        """
        self._check_category(generator, x)
        if k < 0:
            raise QueryError(f"exponent must be nonnegative, got {k}")
        mask = MomentQuery.build([(members, k)]).masks(generator.dim)[0]
        cache = self.resolvents(generator).ensure(k)
        vector = np.ones(generator.dim)
        for j in range(1, k + 1):
            vector = cache[j] @ (mask * vector)
        return float(vector[x])

    # ==================== INDEPENDENT CROSS-CHECKS ====================

    def moment_bruteforce(self, generator: GeneratorMatrix, query: MomentQuery,
                          x: Optional[int] = None) -> float:
        """
        Literal average over all distinct permutations sigma of
        e_x^T R_k D(A_{sigma_k}) ... R_1 D(A_{sigma_1}) 1 (mu^T in place of e_x^T when x is None)
        """
        if x is not None:
            self._check_category(generator, x)
        query = query.reduced()
        if query.total == 0:
            return 1.0
        n_perms = count_distinct_permutations(query.exponents)
        if n_perms > self.brute_force_cap:
            raise NumericalConsistencyError(
                f"brute force needs {n_perms} permutations, cap is {self.brute_force_cap}"
            )

        masks = query.masks(generator.dim)
        cache = self.resolvents(generator).ensure(query.total)
        root = generator.mu if x is None else np.eye(generator.dim)[x]
        terms = []
        for sigma in distinct_permutations(query.exponents):
            vector = np.ones(generator.dim)
            for j, label in enumerate(sigma, start=1):
                vector = cache[j] @ (masks[label] * vector)
            terms.append(float(root @ vector))
        logger.debug(f"Brute force over {n_perms} permutations for query {query}")
        return math.fsum(terms) / n_perms

    def moment_via_theta_recursion(self, generator: GeneratorMatrix, theta: float,
                                   query: MomentQuery, x: Optional[int] = None) -> float:
        """
        Evaluate v(k, A) through the recursion in theta and Q = I + G/theta:

            v(k) = R_k sum_i [theta Gamma(k_i+1) / (k Gamma(theta+k))] D(A_i) Q
                   sum_{l<k_i} [Gamma(theta+k-k_i+l) / Gamma(l+1)] v(k + (l-k_i) e_i)

        memoized over the lattice l <= k, Gamma ratios in log space.
        """
        if x is not None:
            self._check_category(generator, x)
        kernel = to_transition_kernel(generator, theta)
        query = query.reduced()
        d = generator.dim
        root = generator.mu if x is None else np.eye(d)[x]
        if query.total == 0:
            return float(root @ np.ones(d))

        masks = query.masks(d)
        bounds = query.exponents
        n = len(bounds)
        cache = self.resolvents(generator).ensure(query.total)
        projected = [masks[i][:, None] * kernel for i in range(n)]  # D(A_i) Q

        values: Dict[Tuple[int, ...], np.ndarray] = {(0,) * n: np.ones(d)}
        for state in sorted(lattice_states(bounds), key=sum):
            t = sum(state)
            if t == 0:
                continue
            log_theta_part = math.log(theta) - math.log(t) - gammaln(theta + t)
            accumulated = np.zeros(d)
            log_coefficients = []
            for i in range(n):
                ki = state[i]
                if ki == 0:
                    continue
                inner = np.zeros(d)
                for l in range(ki):
                    log_c = (log_theta_part + gammaln(ki + 1)
                             + gammaln(theta + t - ki + l) - gammaln(l + 1))
                    log_coefficients.append(log_c)
                    lower = state[:i] + (l,) + state[i + 1:]
                    inner += math.exp(log_c) * values[lower]
                accumulated += projected[i] @ inner
            spread = max(log_coefficients) - min(log_coefficients)
            if spread > self.spread_limit or max(log_coefficients) > self.spread_limit:
                raise NumericalConsistencyError(
                    f"log-Gamma ratio spread {spread:.1f} exceeds {self.spread_limit:g} (theta={theta:g})"
                )
            values[state] = cache[t] @ accumulated

        return float(root @ values[tuple(bounds)])
