"""
GeneratorSpec: tagged constructor descriptions and their JSON document form.

    {"type": "tridiagonal", "d": 30, "w": 3.0}
    {"type": "average", "divisor": 3.5, "parts": [{"coef": 1.0, "spec": {...}}, ...]}
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from numerics import ValidationError


class SpecDocumentError(ValidationError):
    """Malformed generator spec document"""
    pass


@dataclass(frozen=True)
class ExplicitSpec:
    matrix: Tuple[Tuple[float, ...], ...]
    labels: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class DirichletSpec:
    alpha: Tuple[float, ...]
    labels: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class TridiagonalSpec:
    d: int
    w: float
    labels: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class WrappedSpec:
    d: int
    w: float
    labels: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class DirectedCycleSpec:
    d: int
    w: float
    labels: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class AdjacencySpec:
    matrix: Tuple[Tuple[float, ...], ...]
    labels: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class KernelSpec:
    matrix: Tuple[Tuple[float, ...], ...]
    theta: float
    labels: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class AverageSpec:
    parts: Tuple[Tuple[float, 'GeneratorSpec'], ...]
    divisor: float
    labels: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class ContingencySpec:
    factors: Tuple['GeneratorSpec', ...]
    labels: Optional[Tuple[str, ...]] = None


GeneratorSpec = Union[
    ExplicitSpec, DirichletSpec, TridiagonalSpec, WrappedSpec, DirectedCycleSpec,
    AdjacencySpec, KernelSpec, AverageSpec, ContingencySpec
]

# type tag -> (required keys, optional keys)
_KEYS: Dict[str, Tuple[set, set]] = {
    'explicit': ({'matrix'}, set()),
    'dirichlet': (set(), {'alpha', 'd', 'w'}),
    'tridiagonal': ({'d', 'w'}, set()),
    'wrapped': ({'d', 'w'}, set()),
    'directed_cycle': ({'d', 'w'}, set()),
    'adjacency': ({'matrix'}, set()),
    'kernel': ({'matrix', 'theta'}, set()),
    'average': ({'divisor', 'parts'}, set()),
    'contingency': ({'factors'}, set()),
}


def _positive(value: Any, name: str) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise SpecDocumentError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(number) or number <= 0:
        raise SpecDocumentError(f"{name} must be finite and strictly positive, got {value!r}")
    return number


def _dimension(value: Any, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise SpecDocumentError(f"d must be an integer >= {minimum}, got {value!r}")
    return value


def _matrix(value: Any) -> Tuple[Tuple[float, ...], ...]:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise SpecDocumentError("matrix must be a non-empty list of rows")
    d = len(value)
    if any(len(row) != d for row in value):
        raise SpecDocumentError("matrix must be square")
    try:
        return tuple(tuple(float(x) for x in row) for row in value)
    except (TypeError, ValueError):
        raise SpecDocumentError("matrix entries must be numbers")


def parse_spec(node: Dict[str, Any]) -> GeneratorSpec:
    """
    Parse one spec node (already decoded from JSON)

    Args:
        node: Mapping with a "type" tag

    Returns:
        GeneratorSpec dataclass

    Raises:
        SpecDocumentError on unknown types, unknown keys or bad parameters
    """
    if not isinstance(node, dict):
        raise SpecDocumentError(f"spec node must be an object, got {type(node).__name__}")
    kind = node.get('type')
    if kind not in _KEYS:
        raise SpecDocumentError(f"unknown generator type: {kind!r}")
    required, optional = _KEYS[kind]
    keys = set(node) - {'type', 'labels'}
    missing = required - keys
    if missing:
        raise SpecDocumentError(f"{kind} spec missing keys: {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise SpecDocumentError(f"{kind} spec has unknown keys: {sorted(unknown)}")

    labels = node.get('labels')
    if labels is not None:
        if not isinstance(labels, list):
            raise SpecDocumentError("labels must be a list")
        labels = tuple(str(label) for label in labels)

    if kind == 'explicit':
        return ExplicitSpec(matrix=_matrix(node['matrix']), labels=labels)
    if kind == 'adjacency':
        return AdjacencySpec(matrix=_matrix(node['matrix']), labels=labels)
    if kind == 'kernel':
        return KernelSpec(matrix=_matrix(node['matrix']), theta=_positive(node['theta'], 'theta'),
                          labels=labels)
    if kind == 'dirichlet':
        if 'alpha' in node:
            if 'd' in node or 'w' in node:
                raise SpecDocumentError("dirichlet spec takes either alpha or (d, w), not both")
            alpha = node['alpha']
            if not isinstance(alpha, list):
                raise SpecDocumentError("alpha must be a list")
            alpha = tuple(_positive(a, 'alpha entry') for a in alpha)
        elif 'd' in node and 'w' in node:
            alpha = (_positive(node['w'], 'w'),) * _dimension(node['d'], 2)
        else:
            raise SpecDocumentError("dirichlet spec needs alpha or both d and w")
        return DirichletSpec(alpha=alpha, labels=labels)
    if kind == 'tridiagonal':
        return TridiagonalSpec(d=_dimension(node['d'], 2), w=_positive(node['w'], 'w'), labels=labels)
    if kind == 'wrapped':
        return WrappedSpec(d=_dimension(node['d'], 3), w=_positive(node['w'], 'w'), labels=labels)
    if kind == 'directed_cycle':
        return DirectedCycleSpec(d=_dimension(node['d'], 2), w=_positive(node['w'], 'w'), labels=labels)
    if kind == 'average':
        parts = node['parts']
        if not isinstance(parts, list) or not parts:
            raise SpecDocumentError("average parts must be a non-empty list")
        parsed = []
        for part in parts:
            if not isinstance(part, dict) or set(part) != {'coef', 'spec'}:
                raise SpecDocumentError("average part must have exactly the keys coef and spec")
            parsed.append((_positive(part['coef'], 'coef'), parse_spec(part['spec'])))
        return AverageSpec(parts=tuple(parsed), divisor=_positive(node['divisor'], 'divisor'),
                           labels=labels)
    factors = node['factors']
    if not isinstance(factors, list) or len(factors) < 2:
        raise SpecDocumentError("contingency spec needs at least two factors")
    return ContingencySpec(factors=tuple(parse_spec(f) for f in factors), labels=labels)


def spec_to_dict(spec: GeneratorSpec) -> Dict[str, Any]:
    """Inverse of parse_spec"""
    node: Dict[str, Any]
    if isinstance(spec, ExplicitSpec):
        node = {'type': 'explicit', 'matrix': [list(r) for r in spec.matrix]}
    elif isinstance(spec, AdjacencySpec):
        node = {'type': 'adjacency', 'matrix': [list(r) for r in spec.matrix]}
    elif isinstance(spec, KernelSpec):
        node = {'type': 'kernel', 'matrix': [list(r) for r in spec.matrix], 'theta': spec.theta}
    elif isinstance(spec, DirichletSpec):
        node = {'type': 'dirichlet', 'alpha': list(spec.alpha)}
    elif isinstance(spec, TridiagonalSpec):
        node = {'type': 'tridiagonal', 'd': spec.d, 'w': spec.w}
    elif isinstance(spec, WrappedSpec):
        node = {'type': 'wrapped', 'd': spec.d, 'w': spec.w}
    elif isinstance(spec, DirectedCycleSpec):
        node = {'type': 'directed_cycle', 'd': spec.d, 'w': spec.w}
    elif isinstance(spec, AverageSpec):
        node = {'type': 'average', 'divisor': spec.divisor,
                'parts': [{'coef': c, 'spec': spec_to_dict(s)} for c, s in spec.parts]}
    elif isinstance(spec, ContingencySpec):
        node = {'type': 'contingency', 'factors': [spec_to_dict(f) for f in spec.factors]}
    else:
        raise SpecDocumentError(f"not a generator spec: {spec!r}")
    if spec.labels is not None:
        node['labels'] = list(spec.labels)
    return node


def loads_spec(text: str) -> GeneratorSpec:
    """Parse a JSON spec document"""
    try:
        node = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecDocumentError(f"generator spec is not valid JSON: {e}") from e
    return parse_spec(node)


def load_spec(path: Union[str, Path]) -> GeneratorSpec:
    """Read and parse a JSON spec file"""
    path = Path(path)
    if not path.exists():
        raise SpecDocumentError(f"generator spec file not found: {path}")
    return loads_spec(path.read_text(encoding='utf-8'))


def dumps_spec(spec: GeneratorSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2)


def explicit_spec(matrix: Sequence[Sequence[float]],
                  labels: Optional[Sequence[str]] = None) -> ExplicitSpec:
    """Spec for an explicit matrix; repr() of floats round-trips through JSON exactly"""
    return ExplicitSpec(matrix=tuple(tuple(float(x) for x in row) for row in matrix),
                        labels=tuple(labels) if labels is not None else None)


def spec_dimension(spec: GeneratorSpec) -> int:
    """Dimension implied by a spec without building it"""
    if isinstance(spec, (ExplicitSpec, AdjacencySpec, KernelSpec)):
        return len(spec.matrix)
    if isinstance(spec, DirichletSpec):
        return len(spec.alpha)
    if isinstance(spec, (TridiagonalSpec, WrappedSpec, DirectedCycleSpec)):
        return spec.d
    if isinstance(spec, AverageSpec):
        return spec_dimension(spec.parts[0][1])
    dims: List[int] = [spec_dimension(f) for f in spec.factors]
    return int(math.prod(dims))
