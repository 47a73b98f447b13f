"""Moments package initialization"""
from .query import (
    MomentQuery, QueryError, count_distinct_permutations, log_count_distinct_permutations,
    distinct_permutations
)
from .resolvents import ResolventCache, resolvent_cache
from .engine import MomentEngine, SweepResult

__all__ = [
    'MomentQuery',
    'QueryError',
    'count_distinct_permutations',
    'log_count_distinct_permutations',
    'distinct_permutations',
    'ResolventCache',
    'resolvent_cache',
    'MomentEngine',
    'SweepResult'
]
