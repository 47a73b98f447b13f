"""Generators package initialization"""
from .models import GeneratorMatrix, GeneratorValidationError, validate_generator
from .spec_document import (
    GeneratorSpec, SpecDocumentError, parse_spec, spec_to_dict, load_spec, loads_spec,
    dumps_spec, spec_dimension
)
from .builders import (
    build, dirichlet_graph, tridiagonal, wrapped_tridiagonal, directed_cycle,
    from_adjacency, from_kernel, average, contingency_product, to_transition_kernel, to_spec,
    to_spec_document
)

__all__ = [
    'GeneratorMatrix',
    'GeneratorValidationError',
    'validate_generator',
    'GeneratorSpec',
    'SpecDocumentError',
    'parse_spec',
    'spec_to_dict',
    'load_spec',
    'loads_spec',
    'dumps_spec',
    'spec_dimension',
    'build',
    'dirichlet_graph',
    'tridiagonal',
    'wrapped_tridiagonal',
    'directed_cycle',
    'from_adjacency',
    'from_kernel',
    'average',
    'contingency_product',
    'to_transition_kernel',
    'to_spec',
    'to_spec_document'
]
