"""
Generator matrix model and validation.
A validated generator is immutable and carries theta^G and its stationary vector.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from numerics import (
    ValidationError, as_dense, stationary_distribution, is_strongly_connected
)
from numerics.linalg import ArrayLike

ROW_SUM_TOLERANCE = 1e-12


class GeneratorValidationError(ValidationError):
    """A matrix failed one of the generator invariants"""
    pass


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Validated d x d generator G with stationary distribution mu and bound theta^G"""
    matrix: np.ndarray
    theta_G: float
    mu: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def label(self, index: int) -> str:
        """Display label of a 0-based category (1-based number when unlabelled)"""
        if self.labels:
            return self.labels[index]
        return str(index + 1)

    def __repr__(self) -> str:
        return f"GeneratorMatrix(dim={self.dim}, theta_G={self.theta_G:g})"


def validate_generator(matrix: ArrayLike,
                       labels: Optional[Sequence[str]] = None,
                       row_sum_tolerance: float = ROW_SUM_TOLERANCE) -> GeneratorMatrix:
    """
    Check the generator invariants and compute theta^G and mu

    Args:
        matrix: Candidate d x d matrix
        labels: Optional category names, length d
        row_sum_tolerance: Absolute slack on zero row sums

    Returns:
        GeneratorMatrix with a read-only copy of the entries

    Raises:
        GeneratorValidationError naming the violated invariant (1-based indices)
    """
    try:
        arr = as_dense(matrix)
    except ValidationError as e:
        raise GeneratorValidationError(str(e)) from e
    d = arr.shape[0]

    off_diagonal = arr.copy()
    np.fill_diagonal(off_diagonal, 0.0)
    negative = np.argwhere(off_diagonal < 0)
    if negative.size:
        i, j = negative[0]
        raise GeneratorValidationError(f"off-diagonal negative at ({i + 1},{j + 1})")

    row_sums = arr.sum(axis=1)
    bad_rows = np.flatnonzero(np.abs(row_sums) > row_sum_tolerance)
    if bad_rows.size:
        row = bad_rows[0]
        raise GeneratorValidationError(
            f"row sum violation at row {row + 1}: {row_sums[row]:.3e}"
        )

    if not is_strongly_connected(arr):
        raise GeneratorValidationError("not irreducible")

    if labels is not None:
        labels = tuple(str(label) for label in labels)
        if len(labels) != d:
            raise GeneratorValidationError(f"expected {d} labels, got {len(labels)}")
        if len(set(labels)) != d:
            raise GeneratorValidationError("category labels must be unique")

    theta_G = float(np.abs(np.diag(arr)).max())
    mu = stationary_distribution(arr)
    arr.setflags(write=False)
    mu.setflags(write=False)

    logger.debug(f"Validated generator: d={d}, theta_G={theta_G:g}")
    return GeneratorMatrix(matrix=arr, theta_G=theta_G, mu=mu, labels=labels)
