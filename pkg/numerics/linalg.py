"""
Dense small-matrix linear algebra for generator matrices.
Resolvents, stationary distributions and support-graph connectivity.
"""
from typing import Sequence, Union

import numpy as np
from loguru import logger
from scipy.linalg import lu_factor, lu_solve, solve_triangular
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import NumericalConsistencyError, ValidationError

# Row index = source state, column index = target state.
DenseMatrix = np.ndarray
ProbVector = np.ndarray

ArrayLike = Union[np.ndarray, Sequence[Sequence[float]]]

CLAMP_TOLERANCE = 1e-12
STOCHASTIC_TOLERANCE = 1e-10
PROB_SUM_TOLERANCE = 1e-12


def as_dense(matrix: ArrayLike) -> DenseMatrix:
    """
    Convert input to a square float matrix with finite entries

    Args:
        matrix: Nested sequence or array

    Returns:
        New d x d float64 array
    """
    arr = np.array(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValidationError(f"matrix must be square and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries")
    return arr


def as_prob_vector(vector: Sequence[float], tolerance: float = PROB_SUM_TOLERANCE) -> ProbVector:
    """Validate a probability vector: nonnegative entries summing to 1"""
    arr = np.array(vector, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("probability vector must be one-dimensional and non-empty")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValidationError("probability vector has negative or non-finite entries")
    total = arr.sum()
    if abs(total - 1.0) > tolerance:
        raise ValidationError(f"probability vector sums to {total!r}, not 1")
    return arr


def _factor(matrix: DenseMatrix):
    lu, piv = lu_factor(matrix, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= np.finfo(float).eps * max(1.0, pivots.max()):
        raise NumericalConsistencyError("singular system in LU factorization")
    return lu, piv


def solve(matrix: DenseMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve matrix @ x = rhs by LU with partial pivoting"""
    return lu_solve(_factor(matrix), rhs, check_finite=False)


def _mmatrix_lu(scaled: DenseMatrix):
    """
    LU factors of A = I - S for a generator S, without subtractions

    Elimination in the manner of Grassmann-Taksar-Heyman: A has row sums 1,
    off-diagonals -S_ik <= 0, and each pivot is rebuilt as the current row
    margin plus the remaining off-diagonal mass instead of by cancellation.
    Every intermediate quantity is a sum of nonnegative terms.

    Returns:
        (unit lower L, upper U) with A = L U
    """
    d = scaled.shape[0]
    off = scaled.astype(float).copy()
    np.fill_diagonal(off, 0.0)
    if np.any(off < 0):
        raise ValidationError("resolvent needs nonnegative off-diagonal generator entries")
    margin = np.ones(d)
    pivots = np.empty(d)
    for k in range(d):
        pivots[k] = margin[k] + off[k, k + 1:].sum()
        if k + 1 < d:
            column = off[k + 1:, k] / pivots[k]
            off[k + 1:, k + 1:] += np.outer(column, off[k, k + 1:])
            margin[k + 1:] += column * margin[k]
    np.fill_diagonal(off, 0.0)
    lower = -np.tril(off, -1) / pivots[None, :] + np.eye(d)
    upper = -np.triu(off, 1) + np.diag(pivots)
    return lower, upper


def resolvent(generator: DenseMatrix, j: float,
              clamp_tolerance: float = CLAMP_TOLERANCE,
              stochastic_tolerance: float = STOCHASTIC_TOLERANCE) -> DenseMatrix:
    """
    Compute the resolvent (I - G/j)^{-1}

    Args:
        generator: Valid generator matrix G
        j: Positive scale
        clamp_tolerance: Negative entries up to this magnitude are set to 0
        stochastic_tolerance: Allowed deviation of row sums from 1

    Returns:
        Row-stochastic d x d matrix
    """
    if not j > 0:
        raise ValidationError(f"resolvent scale must be positive, got {j}")
    d = generator.shape[0]
    identity = np.eye(d)
    lower, upper = _mmatrix_lu(generator / j)
    result = solve_triangular(upper, solve_triangular(lower, identity, lower=True, unit_diagonal=True),
                              lower=False, check_finite=False)

    most_negative = result.min()
    if most_negative < -clamp_tolerance:
        raise NumericalConsistencyError(
            f"resolvent entry {most_negative:.3e} below -{clamp_tolerance:g} (j={j})"
        )
    if most_negative < 0:
        logger.warning(f"Clamping resolvent entries down to {most_negative:.3e} (j={j})")
        result[result < 0] = 0.0

    drift = np.abs(result.sum(axis=1) - 1.0).max()
    if drift > stochastic_tolerance:
        raise NumericalConsistencyError(f"resolvent row sums off by {drift:.3e} (j={j})")
    return result


def stationary_distribution(generator: DenseMatrix,
                            tolerance: float = STOCHASTIC_TOLERANCE) -> ProbVector:
    """
    Solve mu^T G = 0 with sum(mu) = 1 for an irreducible generator

    The last equation of G^T mu = 0 is replaced by the normalization row,
    which is valid because an irreducible G has rank d - 1.
    """
    d = generator.shape[0]
    if d == 1:
        return np.ones(1)
    scale = np.abs(np.diag(generator)).max()
    scaled = generator / scale if scale > 0 else generator
    system = scaled.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(d)
    rhs[-1] = 1.0
    mu = solve(system, rhs)

    residual = np.abs(mu @ scaled).max()
    if residual > tolerance:
        raise NumericalConsistencyError(f"stationary residual {residual:.3e} exceeds {tolerance:g}")
    if mu.min() <= 0:
        raise NumericalConsistencyError("stationary distribution has non-positive entries")
    return mu / mu.sum()


def is_strongly_connected(generator: DenseMatrix) -> bool:
    """True iff the graph with an edge i->j whenever G_ij > 0 (i != j) is strongly connected"""
    d = generator.shape[0]
    if d == 1:
        return True
    adjacency = (generator > 0).astype(np.int8)
    np.fill_diagonal(adjacency, 0)
    n_components, _ = connected_components(csr_matrix(adjacency), directed=True, connection='strong')
    return n_components == 1
