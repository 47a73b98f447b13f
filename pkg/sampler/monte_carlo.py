"""
Monte Carlo estimates over sampled MSB(G) measures.
Draws run in fixed-size batches, batch b on stream (seed, b).
"""
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from tqdm import tqdm

from generators import GeneratorMatrix
from moments import MomentQuery
from numerics import ValidationError
from .streams import RngStream
from .stick_breaking import DEFAULT_EPS, MAX_STICKS, sample_msb_batch

BATCH_SIZE = 10_000


@dataclass
class RunningMoments:
    """Count, mean and centered sum of squares, merged batch by batch"""
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def merge(self, values: np.ndarray):
        n_b = int(values.size)
        if n_b == 0:
            return
        mean_b = math.fsum(values) / n_b
        m2_b = math.fsum((values - mean_b) ** 2)
        total = self.count + n_b
        delta = mean_b - self.mean
        self.mean += delta * n_b / total
        self.m2 += m2_b + delta * delta * self.count * n_b / total
        self.count = total

    @property
    def standard_error(self) -> float:
        if self.count < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.count - 1) / self.count)


class MonteCarloSampler:
    """Batched sampler of truncated MSB(G) measures and the statistics built on them"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        """
        Initialize sampler

        Args:
            config: Configuration dictionary (uses the 'sampler' section)
        """
        self.config = config or {}
        section = self.config.get('sampler', {})
        self.eps = float(section.get('eps', DEFAULT_EPS))
        self.batch_size = int(section.get('batch_size', BATCH_SIZE))
        self.show_progress = bool(section.get('show_progress', False))
        self.max_sticks = int(section.get('max_sticks', MAX_STICKS))
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be positive, got {self.batch_size}")
        logger.debug(f"Monte Carlo sampler initialized (eps={self.eps:g}, batch={self.batch_size})")

    def batches(self, generator: GeneratorMatrix, n_samples: int, seed: int,
                theta: Optional[float] = None, eps: Optional[float] = None,
                start: Optional[int] = None, label: str = "sampling") -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """Yield (nu matrix, first states) for consecutive batches totalling n_samples draws"""
        if n_samples < 0:
            raise ValidationError(f"sample count must be nonnegative, got {n_samples}")
        root = RngStream(seed)
        eps = self.eps if eps is None else eps
        n_batches = -(-n_samples // self.batch_size)
        for b in tqdm(range(n_batches), desc=label, disable=not self.show_progress):
            size = min(self.batch_size, n_samples - b * self.batch_size)
            yield sample_msb_batch(generator, size, root.for_batch(b), theta=theta, eps=eps,
                                   start=start, max_sticks=self.max_sticks)

    def mc_moment_estimate(self, generator: GeneratorMatrix, query: MomentQuery, n_samples: int,
                           seed: int, theta: Optional[float] = None, eps: Optional[float] = None,
                           x: Optional[int] = None) -> Tuple[float, float]:
        """
        Sample mean and standard error of prod_j nu(A_j)^{k_j}

        Args:
            generator: Validated generator
            query: Moment query
            n_samples: Number of measures N >= 2
            seed: Root seed
            theta: Sampling strength (theta^G when omitted)
            eps: Truncation threshold (config value when omitted)
            x: Condition on T_1 = x by starting every chain at x

        Returns:
            (estimate, standard_error); exactly (1, 0) for an all-zero query
        """
        if n_samples < 2:
            raise ValidationError(f"Monte Carlo estimate needs at least 2 samples, got {n_samples}")
        query = query.reduced()
        query.check_dimension(generator.dim)
        if query.total == 0:
            return 1.0, 0.0
        if x is not None and not 0 <= x < generator.dim:
            raise ValidationError(f"category {x + 1} outside 1..{generator.dim}")

        masks = query.masks(generator.dim)
        exponents = np.asarray(query.exponents)
        stats = RunningMoments()
        for nu, _ in self.batches(generator, n_samples, seed, theta, eps, start=x, label="moment"):
            values = np.prod((nu @ masks.T) ** exponents, axis=1)
            stats.merge(values)
        logger.debug(f"MC estimate of {query}: {stats.mean:.6g} +/- {stats.standard_error:.2g} (N={n_samples})")
        return stats.mean, stats.standard_error

    def support_coverage(self, generator: GeneratorMatrix, targets: Sequence[Sequence[float]],
                         eps_ball: float, n_samples: int, seed: int,
                         theta: Optional[float] = None) -> List[int]:
        """Number of sampled nu within sup-norm eps_ball of each target vector"""
        if eps_ball <= 0:
            raise ValidationError(f"ball radius must be positive, got {eps_ball}")
        points = np.atleast_2d(np.asarray(targets, dtype=float))
        if points.shape[1] != generator.dim:
            raise ValidationError(f"targets have {points.shape[1]} coordinates, generator has {generator.dim}")
        hits = np.zeros(points.shape[0], dtype=np.int64)
        for nu, _ in self.batches(generator, n_samples, seed, theta, label="coverage"):
            distance = np.abs(nu[:, None, :] - points[None, :, :]).max(axis=2)
            hits += (distance <= eps_ball).sum(axis=0)
        return hits.tolist()
