"""
Markovian stick-breaking draws.

nu = sum_j P_j delta_{T_j} with (P_j) ~ GEM(theta) and (T_j) a stationary chain
with kernel Q = I + G/theta. Sticks stop at the first m whose remaining mass
prod_{i<=m} (1 - X_i) falls below eps; that remainder goes to one extra atom at
the next chain state T_{m+1}, so every truncated measure has total mass 1.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from loguru import logger

from generators import GeneratorMatrix, to_transition_kernel
from numerics import ValidationError, NumericalConsistencyError
from .streams import RngLike, as_generator

DEFAULT_EPS = 1e-12
MAX_STICKS = 1_000_000

Start = Optional[Union[int, np.ndarray]]


@dataclass(frozen=True)
class TruncatedMeasure:
    """
    Finite-atom version of one sampled nu

    atoms: (category, weight) per stick, weights > 0
    residual: remaining stick mass, placed on residual_state
    first_state: T_1
    """
    atoms: Tuple[Tuple[int, float], ...]
    residual: float
    residual_state: int
    first_state: int

    def atom_table(self) -> Tuple[np.ndarray, np.ndarray]:
        """Categories and weights with the residual atom appended last"""
        categories = np.array([c for c, _ in self.atoms] + [self.residual_state], dtype=np.int64)
        weights = np.array([w for _, w in self.atoms] + [self.residual], dtype=float)
        return categories, weights

    @property
    def total_mass(self) -> float:
        return math.fsum(w for _, w in self.atoms) + self.residual

    def to_vector(self, dim: int) -> np.ndarray:
        """nu as a probability vector over the d categories"""
        categories, weights = self.atom_table()
        return np.bincount(categories, weights=weights, minlength=dim)


def _check_eps(eps: float):
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"truncation threshold must lie in (0, 1), got {eps}")


def _sampling_theta(generator: GeneratorMatrix, theta: Optional[float]) -> float:
    if theta is not None:
        return float(theta)
    # one category has theta^G = 0 and any positive theta gives Q = I
    return generator.theta_G if generator.theta_G > 0 else 1.0


def sample_gem(theta: float, eps: float, rng: RngLike,
               max_sticks: int = MAX_STICKS) -> Tuple[np.ndarray, float]:
    """
    GEM(theta) weights truncated at remaining mass < eps

    X_j ~ Beta(1, theta) by inverse CDF 1 - U^{1/theta}, P_j = X_j prod_{i<j} (1 - X_i).

    Returns:
        (weights, residual) with weights.sum() + residual == 1 up to rounding
    """
    if theta <= 0:
        raise ValidationError(f"theta must be positive, got {theta}")
    _check_eps(eps)
    gen = as_generator(rng)
    inverse = 1.0 / theta
    chunk = int(min(max_sticks, max(16, theta * math.log(1.0 / eps) + 16)))

    pieces: List[np.ndarray] = []
    remaining = 1.0
    drawn = 0
    while True:
        x = 1.0 - gen.random(chunk) ** inverse
        left = remaining * np.cumprod(1.0 - x)
        below = np.flatnonzero(left < eps)
        stop = int(below[0]) + 1 if below.size else chunk
        before = np.concatenate(([remaining], left[:stop - 1]))
        pieces.append(x[:stop] * before)
        remaining = float(left[stop - 1])
        drawn += stop
        if below.size:
            break
        if drawn >= max_sticks:
            raise NumericalConsistencyError(f"stick budget {max_sticks} exhausted at theta={theta:g}")
    return np.concatenate(pieces), remaining


def _step(cumulative: np.ndarray, states: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One vectorized chain transition by inverse CDF on each current row"""
    nxt = (u[:, None] >= cumulative[states]).sum(axis=1)
    return np.minimum(nxt, cumulative.shape[1] - 1)


def _cumulative(kernel: np.ndarray) -> np.ndarray:
    cumulative = np.cumsum(kernel, axis=1)
    cumulative[:, -1] = 1.0
    return cumulative


def _initial_states(mu: np.ndarray, n_chains: int, gen: np.random.Generator, start: Start) -> np.ndarray:
    d = mu.shape[0]
    if start is None:
        cdf = np.cumsum(mu)
        cdf[-1] = 1.0
        return np.minimum(np.searchsorted(cdf, gen.random(n_chains), side='right'), d - 1)
    states = np.broadcast_to(np.asarray(start, dtype=np.int64), (n_chains,)).copy()
    if states.size and (states.min() < 0 or states.max() >= d):
        raise ValidationError(f"start state outside 1..{d}")
    return states


def sample_chains(kernel: np.ndarray, mu: np.ndarray, length: int, n_chains: int,
                  rng: RngLike, start: Start = None) -> np.ndarray:
    """
    n_chains independent runs of the chain with kernel Q

    T_1 ~ mu (or fixed at start), T_{j+1} | T_j ~ Q[T_j].

    Returns:
        n_chains x length array of 0-based categories
    """
    if length < 0 or n_chains < 0:
        raise ValidationError("chain length and count must be nonnegative")
    gen = as_generator(rng)
    states = np.empty((n_chains, length), dtype=np.int64)
    if length == 0 or n_chains == 0:
        return states
    cumulative = _cumulative(np.asarray(kernel, dtype=float))
    states[:, 0] = _initial_states(np.asarray(mu, dtype=float), n_chains, gen, start)
    for j in range(1, length):
        states[:, j] = _step(cumulative, states[:, j - 1], gen.random(n_chains))
    return states


def sample_chain(kernel: np.ndarray, mu: np.ndarray, length: int, rng: RngLike,
                 start: Optional[int] = None) -> List[int]:
    return sample_chains(kernel, mu, length, 1, rng, start)[0].tolist()


def sample_msb(generator: GeneratorMatrix, rng: RngLike, theta: Optional[float] = None,
               eps: float = DEFAULT_EPS, start: Optional[int] = None,
               max_sticks: int = MAX_STICKS) -> TruncatedMeasure:
    """
    Draw one truncated MSB(G) measure

    Args:
        generator: Validated generator
        rng: Stream or numpy Generator
        theta: Strength >= theta^G (theta^G when omitted)
        eps: Truncation threshold on the remaining stick mass
        start: Fix T_1 instead of drawing it from mu

    Raises:
        GeneratorValidationError: theta below theta^G
    """
    theta = _sampling_theta(generator, theta)
    kernel = to_transition_kernel(generator, theta)
    gen = as_generator(rng)
    weights, residual = sample_gem(theta, eps, gen, max_sticks)
    chain = sample_chains(kernel, generator.mu, weights.size + 1, 1, gen, start)[0]
    atoms = tuple((int(c), float(w)) for c, w in zip(chain[:-1], weights) if w > 0)
    return TruncatedMeasure(
        atoms=atoms,
        residual=residual,
        residual_state=int(chain[-1]),
        first_state=int(chain[0])
    )


def sample_msb_batch(generator: GeneratorMatrix, size: int, rng: RngLike,
                     theta: Optional[float] = None, eps: float = DEFAULT_EPS,
                     start: Start = None, max_sticks: int = MAX_STICKS) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw `size` truncated measures at once, same truncation rule as sample_msb

    All replicates break one stick per step; a replicate drops out once its
    remaining mass is below eps, after moving that mass to its next state.

    Returns:
        (size x d matrix of nu weight vectors, T_1 per replicate)
    """
    _check_eps(eps)
    theta = _sampling_theta(generator, theta)
    cumulative = _cumulative(to_transition_kernel(generator, theta))
    gen = as_generator(rng)
    inverse = 1.0 / theta

    nu = np.zeros((size, generator.dim))
    remaining = np.ones(size)
    state = _initial_states(generator.mu, size, gen, start)
    first = state.copy()
    alive = np.arange(size)
    steps = 0
    while alive.size:
        steps += 1
        if steps > max_sticks:
            raise NumericalConsistencyError(f"stick budget {max_sticks} exhausted at theta={theta:g}")
        x = 1.0 - gen.random(alive.size) ** inverse
        before = remaining[alive]
        nu[alive, state[alive]] += x * before
        left = before * (1.0 - x)
        remaining[alive] = left
        state[alive] = _step(cumulative, state[alive], gen.random(alive.size))
        done = left < eps
        finished = alive[done]
        nu[finished, state[finished]] += left[done]
        alive = alive[~done]
    logger.debug(f"Sampled {size} measures in {steps} stick steps (theta={theta:g})")
    return nu, first


def sample_data(measure: TruncatedMeasure, n: int, rng: RngLike) -> List[int]:
    """n i.i.d. draws Y_i = T_{J_i}, J_i chosen with probability P_j"""
    if n < 0:
        raise ValidationError(f"sample size must be nonnegative, got {n}")
    if n == 0:
        return []
    categories, weights = measure.atom_table()
    picks = as_generator(rng).choice(weights.size, size=n, p=weights / weights.sum())
    return categories[picks].tolist()
