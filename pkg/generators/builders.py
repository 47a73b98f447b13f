"""
Generator families: Dirichlet graphs, geometric (tridiagonal / wrapped) graphs,
directed cycles, adjacency and kernel forms, averages and contingency products.
"""
import itertools
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from numerics import as_dense
from .models import GeneratorMatrix, GeneratorValidationError, validate_generator, ROW_SUM_TOLERANCE
from .spec_document import (
    GeneratorSpec, ExplicitSpec, DirichletSpec, TridiagonalSpec, WrappedSpec,
    DirectedCycleSpec, AdjacencySpec, KernelSpec, AverageSpec, ContingencySpec,
    explicit_spec, dumps_spec
)

MAX_PRODUCT_DIM = 4096
THETA_SLACK = 1e-12


def _with_generator_diagonal(adjacency: np.ndarray) -> np.ndarray:
    """Replace the diagonal so that every row sums to zero"""
    matrix = adjacency.astype(float).copy()
    np.fill_diagonal(matrix, 0.0)
    np.fill_diagonal(matrix, -matrix.sum(axis=1))
    return matrix


def _check_weight(w: float) -> float:
    if not (math.isfinite(w) and w > 0):
        raise GeneratorValidationError(f"edge weight must be finite and positive, got {w}")
    return float(w)


def dirichlet_graph(alpha: Sequence[float], labels: Optional[Sequence[str]] = None) -> GeneratorMatrix:
    """
    Generator of the complete directed graph with incoming weight alpha_j at node j

    G_ij = alpha_j for i != j and G_jj = alpha_j - sum(alpha); mu = alpha / sum(alpha).
    """
    alpha = np.array(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size < 2:
        raise GeneratorValidationError("Dirichlet graph needs d >= 2")
    if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
        raise GeneratorValidationError("Dirichlet weights must be finite and positive")
    d = alpha.size
    adjacency = np.tile(alpha, (d, 1))
    return validate_generator(_with_generator_diagonal(adjacency), labels)


def tridiagonal(d: int, w: float, labels: Optional[Sequence[str]] = None) -> GeneratorMatrix:
    """Line graph on d categories with weight w between neighbours"""
    if d < 2:
        raise GeneratorValidationError(f"tridiagonal generator needs d >= 2, got {d}")
    w = _check_weight(w)
    adjacency = np.zeros((d, d))
    idx = np.arange(d - 1)
    adjacency[idx, idx + 1] = w
    adjacency[idx + 1, idx] = w
    return validate_generator(_with_generator_diagonal(adjacency), labels)


def wrapped_tridiagonal(d: int, w: float, labels: Optional[Sequence[str]] = None) -> GeneratorMatrix:
    """Cycle graph: tridiagonal plus G_{d,1} = G_{1,d} = w"""
    if d < 3:
        raise GeneratorValidationError(f"wrapped generator needs d >= 3, got {d}")
    w = _check_weight(w)
    adjacency = np.zeros((d, d))
    idx = np.arange(d)
    adjacency[idx, (idx + 1) % d] = w
    adjacency[(idx + 1) % d, idx] = w
    return validate_generator(_with_generator_diagonal(adjacency), labels)


def directed_cycle(d: int, w: float, labels: Optional[Sequence[str]] = None) -> GeneratorMatrix:
    """Directed cycle i -> i+1 (mod d) with weight w; uniform stationary vector"""
    if d < 2:
        raise GeneratorValidationError(f"directed cycle needs d >= 2, got {d}")
    w = _check_weight(w)
    adjacency = np.zeros((d, d))
    idx = np.arange(d)
    adjacency[idx, (idx + 1) % d] = w
    return validate_generator(_with_generator_diagonal(adjacency), labels)


def from_adjacency(adjacency: Any, labels: Optional[Sequence[str]] = None) -> GeneratorMatrix:
    """Generator from a weighted (directed or undirected) adjacency matrix; its diagonal is ignored"""
    matrix = as_dense(adjacency)
    off = matrix.copy()
    np.fill_diagonal(off, 0.0)
    if np.any(off < 0):
        raise GeneratorValidationError("adjacency weights must be nonnegative")
    return validate_generator(_with_generator_diagonal(matrix), labels)


def from_kernel(kernel: Any, theta: float, labels: Optional[Sequence[str]] = None) -> GeneratorMatrix:
    """G = theta (Q - I) for a row-stochastic Q"""
    q = as_dense(kernel)
    if np.any(q < 0) or np.abs(q.sum(axis=1) - 1.0).max() > 1e-12:
        raise GeneratorValidationError("kernel must be row-stochastic")
    if not (math.isfinite(theta) and theta > 0):
        raise GeneratorValidationError(f"theta must be positive, got {theta}")
    matrix = theta * (q - np.eye(q.shape[0]))
    # exact zero row sums regardless of rounding in theta * q
    return validate_generator(_with_generator_diagonal(matrix), labels)


def average(parts: Sequence[Tuple[float, GeneratorMatrix]], divisor: float,
            labels: Optional[Sequence[str]] = None) -> GeneratorMatrix:
    """
    Entrywise (sum_i c_i G_i) / divisor

    Args:
        parts: (coefficient > 0, generator) pairs of equal dimension
        divisor: Explicit positive normalizer, e.g. 3.5 for (G1 + 2.5 G2)/3.5
    """
    if not parts:
        raise GeneratorValidationError("average needs at least one part")
    if not (math.isfinite(divisor) and divisor > 0):
        raise GeneratorValidationError(f"average divisor must be positive, got {divisor}")
    d = parts[0][1].dim
    total = np.zeros((d, d))
    for coef, generator in parts:
        if generator.dim != d:
            raise GeneratorValidationError(f"dimension mismatch in average: {generator.dim} != {d}")
        if not (math.isfinite(coef) and coef > 0):
            raise GeneratorValidationError(f"average coefficient must be positive, got {coef}")
        total += coef * generator.matrix
    if labels is None:
        labels = parts[0][1].labels
    return validate_generator(_with_generator_diagonal(total / divisor), labels)


def contingency_product(factors: Sequence[GeneratorMatrix],
                        max_dim: int = MAX_PRODUCT_DIM,
                        labels: Optional[Sequence[str]] = None) -> GeneratorMatrix:
    """
    Generator over S_1 x ... x S_k moving one factor at a time

    G_xy = G^(j)_{s_j t_j} when x and y differ only in factor j, 0 for other x != y.
    States are ordered with the first factor varying slowest.
    """
    if len(factors) < 2:
        raise GeneratorValidationError("contingency product needs at least two factors")
    dims = [f.dim for f in factors]
    total_dim = math.prod(dims)
    if total_dim > max_dim:
        raise GeneratorValidationError(
            f"contingency product dimension {total_dim} exceeds cap {max_dim}"
        )

    # Kronecker sum of the off-diagonal parts
    adjacency = np.zeros((total_dim, total_dim))
    for j, factor in enumerate(factors):
        off = factor.matrix.copy()
        np.fill_diagonal(off, 0.0)
        term = np.ones((1, 1))
        for i, other in enumerate(dims):
            term = np.kron(term, off if i == j else np.eye(other))
        adjacency += term

    if labels is None:
        names = [[f.label(i) for i in range(f.dim)] for f in factors]
        labels = ['|'.join(combo) for combo in itertools.product(*names)]
    logger.debug(f"Contingency product of dims {dims} -> {total_dim}")
    return validate_generator(_with_generator_diagonal(adjacency), labels)


def to_transition_kernel(generator: GeneratorMatrix, theta: float,
                         slack: float = THETA_SLACK) -> np.ndarray:
    """
    Q = I + G / theta for theta >= theta^G

    Returns:
        Row-stochastic matrix with nonnegative entries and mu^T Q = mu^T
    """
    if theta < generator.theta_G - slack or theta <= 0:
        raise GeneratorValidationError(
            f"theta {theta} is below theta^G = {generator.theta_G}"
        )
    q = np.eye(generator.dim) + generator.matrix / theta
    # theta at the bound can leave -1e-17 on the binding diagonal
    q[q < 0] = 0.0
    return q


def build(spec: GeneratorSpec, config: Optional[Dict[str, Any]] = None) -> GeneratorMatrix:
    """
    Build and validate the generator a spec describes

    Args:
        spec: Parsed GeneratorSpec
        config: Configuration dictionary (uses the 'generators' section)

    Returns:
        Validated GeneratorMatrix
    """
    config = config or {}
    max_dim = config.get('generators', {}).get('max_product_dim', MAX_PRODUCT_DIM)
    tolerance = config.get('generators', {}).get('row_sum_tolerance', ROW_SUM_TOLERANCE)

    if isinstance(spec, ExplicitSpec):
        return validate_generator(spec.matrix, spec.labels, row_sum_tolerance=tolerance)
    if isinstance(spec, DirichletSpec):
        return dirichlet_graph(spec.alpha, spec.labels)
    if isinstance(spec, TridiagonalSpec):
        return tridiagonal(spec.d, spec.w, spec.labels)
    if isinstance(spec, WrappedSpec):
        return wrapped_tridiagonal(spec.d, spec.w, spec.labels)
    if isinstance(spec, DirectedCycleSpec):
        return directed_cycle(spec.d, spec.w, spec.labels)
    if isinstance(spec, AdjacencySpec):
        return from_adjacency(spec.matrix, spec.labels)
    if isinstance(spec, KernelSpec):
        return from_kernel(spec.matrix, spec.theta, spec.labels)
    if isinstance(spec, AverageSpec):
        parts = [(coef, build(part, config)) for coef, part in spec.parts]
        return average(parts, spec.divisor, spec.labels)
    if isinstance(spec, ContingencySpec):
        factors: List[GeneratorMatrix] = [build(f, config) for f in spec.factors]
        return contingency_product(factors, max_dim=max_dim, labels=spec.labels)
    raise GeneratorValidationError(f"not a generator spec: {spec!r}")


def to_spec(generator: GeneratorMatrix) -> ExplicitSpec:
    """Explicit spec reproducing a built generator entry for entry"""
    return explicit_spec(generator.matrix.tolist(), generator.labels)


def to_spec_document(generator: GeneratorMatrix) -> str:
    """JSON text of to_spec(generator); build(loads_spec(text)) gives the same entries"""
    return dumps_spec(to_spec(generator))
