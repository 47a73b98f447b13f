"""Numerics package initialization"""
from .errors import MSBError, ValidationError, NumericalConsistencyError, StatisticalCheckError
from .linalg import (
    DenseMatrix, ProbVector, as_dense, as_prob_vector, solve,
    resolvent, stationary_distribution, is_strongly_connected
)

__all__ = [
    'MSBError',
    'ValidationError',
    'NumericalConsistencyError',
    'StatisticalCheckError',
    'DenseMatrix',
    'ProbVector',
    'as_dense',
    'as_prob_vector',
    'solve',
    'resolvent',
    'stationary_distribution',
    'is_strongly_connected'
]
