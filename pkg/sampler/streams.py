"""
Seeded random streams for reproducible sampling.

Every stream is a numpy Generator over the Philox counter-based bit generator,
keyed by a SeedSequence. Child streams for Monte Carlo batches are keyed by
(seed, batch index), so results depend only on the seed and the batch size.
"""
from typing import Sequence, Union

import numpy as np

from numerics import ValidationError

ALGORITHM = "philox4x64"
SEED_MAX = 2 ** 64 - 1


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


class RngStream:
    """Deterministic stream: identical seed gives identical output on every platform"""

    algorithm = ALGORITHM

    def __init__(self, seed: int, path: Sequence[int] = ()):
        self.seed = _check_seed(seed)
        self.path = tuple(int(p) for p in path)
        entropy = [self.seed, *self.path] if self.path else self.seed
        self.generator = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))

    def for_batch(self, index: int) -> 'RngStream':
        """Independent child stream for one batch or replicate"""
        return RngStream(self.seed, self.path + (int(index),))

    def random(self, size=None):
        return self.generator.random(size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path}, algorithm={self.algorithm})"


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Accept a stream or a bare numpy Generator"""
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise ValidationError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")
