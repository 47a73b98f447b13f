"""
Resolvent cache: R_j = (I - G/j)^{-1} for j = 1..k, shared per generator.
"""
import threading
import weakref
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from generators import GeneratorMatrix
from numerics import resolvent
from numerics.linalg import CLAMP_TOLERANCE, STOCHASTIC_TOLERANCE


class ResolventCache:
    """Integer-indexed resolvents of one generator, built on demand and then read-only"""

    def __init__(self, generator: GeneratorMatrix, config: Optional[Dict[str, Any]] = None):
        config = config or {}
        self.generator = generator
        self.clamp_tolerance = config.get('numerics', {}).get('clamp_tolerance', CLAMP_TOLERANCE)
        self.stochastic_tolerance = config.get('numerics', {}).get('stochastic_tolerance',
                                                                   STOCHASTIC_TOLERANCE)
        self._resolvents: List[np.ndarray] = []
        self._lock = threading.Lock()

    @property
    def tolerances(self) -> Tuple[float, float]:
        return float(self.clamp_tolerance), float(self.stochastic_tolerance)

    def ensure(self, k_max: int) -> 'ResolventCache':
        """Compute R_1..R_{k_max} if not already cached"""
        if len(self._resolvents) >= k_max:
            return self
        with self._lock:
            start = len(self._resolvents) + 1
            for j in range(start, k_max + 1):
                r = resolvent(self.generator.matrix, j, self.clamp_tolerance, self.stochastic_tolerance)
                r.setflags(write=False)
                self._resolvents.append(r)
            if k_max >= start:
                logger.debug(f"Resolvent cache extended to j={k_max} (d={self.generator.dim})")
        return self

    def __getitem__(self, j: int) -> np.ndarray:
        if j < 1:
            raise IndexError(f"resolvent index must be >= 1, got {j}")
        self.ensure(j)
        return self._resolvents[j - 1]

    def __len__(self) -> int:
        return len(self._resolvents)


_CACHES: 'weakref.WeakKeyDictionary[GeneratorMatrix, Dict[Tuple[float, float], ResolventCache]]' = \
    weakref.WeakKeyDictionary()
_CACHES_LOCK = threading.Lock()


def resolvent_cache(generator: GeneratorMatrix, config: Optional[Dict[str, Any]] = None) -> ResolventCache:
    """Cache keyed by generator identity and tolerances; lives as long as the generator does"""
    with _CACHES_LOCK:
        by_tolerance = _CACHES.setdefault(generator, {})
        candidate = ResolventCache(generator, config)
        cache = by_tolerance.get(candidate.tolerances)
        if cache is None:
            cache = candidate
            by_tolerance[cache.tolerances] = cache
        return cache
