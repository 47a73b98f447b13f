"""Sampler package initialization"""
from .streams import RngStream, as_generator
from .stick_breaking import (
    TruncatedMeasure, sample_gem, sample_chain, sample_chains, sample_msb,
    sample_msb_batch, sample_data
)
from .monte_carlo import MonteCarloSampler, RunningMoments

__all__ = [
    'RngStream',
    'as_generator',
    'TruncatedMeasure',
    'sample_gem',
    'sample_chain',
    'sample_chains',
    'sample_msb',
    'sample_msb_batch',
    'sample_data',
    'MonteCarloSampler',
    'RunningMoments'
]
