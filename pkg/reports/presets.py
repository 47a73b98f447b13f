"""
Histogram-smoothing presets: fixed data on 30 bins and the generators compared on it.
Bins are 1-based.
"""
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
from loguru import logger

from generators import (
    GeneratorMatrix, GeneratorSpec, build
)
from generators.spec_document import AverageSpec, DirichletSpec, TridiagonalSpec, WrappedSpec
from numerics import ValidationError
from posterior import CountVector, PosteriorSmoother

BINS = 30
DIRICHLET_WEIGHT = 2.0 / 29.0
MIXTURE_COEFFICIENT = 2.5


class PresetError(ValidationError):
    """Unknown preset name"""
    pass


@dataclass(frozen=True)
class FigurePreset:
    """Counts placed in 1-based bins plus the named generators to smooth them with"""
    name: str
    dim: int
    counts: Mapping[int, int]
    generators: Tuple[Tuple[str, GeneratorSpec], ...]

    def count_vector(self) -> CountVector:
        return CountVector.from_mapping(self.dim, {b - 1: k for b, k in self.counts.items()})


def _panels(second: GeneratorSpec, third: GeneratorSpec) -> Tuple[Tuple[str, GeneratorSpec], ...]:
    """G1 Dirichlet, the two preset-specific generators, and G4 = (G1 + 2.5 G2) / 3.5"""
    first = DirichletSpec(alpha=(DIRICHLET_WEIGHT,) * BINS)
    mixture = AverageSpec(parts=((1.0, first), (MIXTURE_COEFFICIENT, second)),
                          divisor=1.0 + MIXTURE_COEFFICIENT)
    return (('G1', first), ('G2', second), ('G3', third), ('G4', mixture))


PRESETS: Dict[str, FigurePreset] = {
    'normal': FigurePreset(
        name='normal',
        dim=BINS,
        counts={10: 1, 12: 1, 15: 2, 17: 2},
        generators=_panels(TridiagonalSpec(BINS, 3.0), TridiagonalSpec(BINS, 8.0))
    ),
    'gamma': FigurePreset(
        name='gamma',
        dim=BINS,
        counts={1: 1, 2: 1, 3: 1, 7: 1, 16: 1},
        generators=_panels(TridiagonalSpec(BINS, 8.0), TridiagonalSpec(BINS, 16.0))
    ),
    'wrapped': FigurePreset(
        name='wrapped',
        dim=BINS,
        counts={3: 1},
        generators=_panels(WrappedSpec(BINS, 3.0), TridiagonalSpec(BINS, 3.0))
    ),
}


def get_preset(name: str) -> FigurePreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise PresetError(f"unknown preset {name!r} (choose from {', '.join(sorted(PRESETS))})")


def smooth_preset(preset: FigurePreset, smoother: Optional[PosteriorSmoother] = None,
                  config: Optional[Dict[str, Any]] = None) -> Dict[str, Tuple[GeneratorMatrix, np.ndarray]]:
    """
    Posterior mean pmf of the preset counts under each of its generators

    Returns:
        {generator name: (generator, pmf)} in panel order
    """
    config = config or {}
    smoother = smoother or PosteriorSmoother(config)
    counts = preset.count_vector()
    results: Dict[str, Tuple[GeneratorMatrix, np.ndarray]] = {}
    for name, spec in preset.generators:
        generator = build(spec, config)
        results[name] = (generator, smoother.posterior_mean_pmf(generator, counts))
        logger.info(f"Preset {preset.name}: smoothed n={counts.n} under {name}")
    return results
