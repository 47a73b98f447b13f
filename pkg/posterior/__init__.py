"""Posterior package initialization"""
from .smoothing import CountVector, PosteriorQuery, PosteriorSmoother
from .closed_forms import (
    dirichlet_posterior_mean, dirichlet_multinomial_sequence, log_dirichlet_multinomial_sequence,
    beta_raw_moment
)

__all__ = [
    'CountVector',
    'PosteriorQuery',
    'PosteriorSmoother',
    'dirichlet_posterior_mean',
    'dirichlet_multinomial_sequence',
    'log_dirichlet_multinomial_sequence',
    'beta_raw_moment'
]
