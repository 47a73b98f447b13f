#!/usr/bin/env python3
"""
Test generator layer - families, validation, spec documents
"""
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from generators import (
    GeneratorValidationError, SpecDocumentError, validate_generator, build, loads_spec, dumps_spec,
    parse_spec, spec_dimension, dirichlet_graph, tridiagonal, wrapped_tridiagonal, directed_cycle,
    from_adjacency, from_kernel, average, contingency_product, to_transition_kernel, to_spec,
    to_spec_document
)
from numerics import ValidationError
from loguru import logger

logger.remove()
logger.add(sys.stderr, format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | <level>{message}</level>", level="WARNING")


def expect_error(fn, error, fragment=None):
    try:
        fn()
    except error as e:
        if fragment is not None:
            assert fragment in str(e), f"{fragment!r} not in {e}"
        return e
    raise AssertionError(f"expected {error.__name__}")


def test_tridiagonal_small():
    g = tridiagonal(3, 1.0)
    assert np.array_equal(g.matrix, [[-1, 1, 0], [1, -2, 1], [0, 1, -1]])
    assert g.theta_G == 2.0
    assert np.allclose(g.mu, np.full(3, 1 / 3), atol=1e-15)
    assert np.array_equal(tridiagonal(2, 3.0).matrix, [[-3, 3], [3, -3]])
    print("[OK] tridiagonal(3, 1) and tridiagonal(2, 3)")


def test_tridiagonal_thirty():
    g = tridiagonal(30, 3.0)
    assert g.matrix[0, 0] == -3.0 and g.matrix[29, 29] == -3.0
    assert np.all(np.diag(g.matrix)[1:-1] == -6.0)
    assert g.theta_G == 6.0
    assert np.allclose(g.mu, np.full(30, 1 / 30), atol=1e-14)
    print("[OK] tridiagonal(30, 3): theta^G = 6, mu uniform")


def test_dirichlet_graph():
    g = dirichlet_graph([1.0, 2.0, 3.0])
    assert np.allclose(np.diag(g.matrix), [-5, -4, -3])
    assert np.allclose(g.mu, [1 / 6, 1 / 3, 1 / 2], atol=1e-14)
    assert np.array_equal(dirichlet_graph([1.0, 1.0]).matrix, [[-1, 1], [1, -1]])

    w = 2.0 / 29.0
    g30 = dirichlet_graph([w] * 30)
    off = g30.matrix[~np.eye(30, dtype=bool)]
    assert np.allclose(off, w)
    assert np.allclose(np.diag(g30.matrix), -2.0, atol=1e-14)
    assert np.allclose(g30.mu, np.full(30, 1 / 30), atol=1e-14)
    print("[OK] Dirichlet graphs")


def test_wrapped_tridiagonal():
    g3 = wrapped_tridiagonal(3, 1.0)
    assert np.allclose(g3.matrix, [[-2, 1, 1], [1, -2, 1], [1, 1, -2]])
    g = wrapped_tridiagonal(30, 3.0)
    assert g.matrix[29, 0] == 3.0 and g.matrix[0, 29] == 3.0
    assert np.abs(g.matrix.sum(axis=1)).max() == 0.0
    expect_error(lambda: wrapped_tridiagonal(2, 1.0), GeneratorValidationError)
    print("[OK] Wrapped tridiagonal")


def test_directed_cycle():
    g = directed_cycle(5, 2.0)
    assert np.allclose(g.mu, np.full(5, 0.2), atol=1e-14)
    assert g.matrix[4, 0] == 2.0 and g.matrix[0, 4] == 0.0
    print("[OK] Directed cycle has uniform mu")


def test_adjacency_and_kernel():
    g = from_adjacency([[5.0, 1.0], [2.0, 7.0]])
    assert np.array_equal(g.matrix, [[-1, 1], [2, -2]])
    assert np.allclose(g.mu, [2 / 3, 1 / 3], atol=1e-14)

    q = [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]]
    gk = from_kernel(q, 10.0)
    assert np.allclose(gk.matrix, 10.0 * (np.array(q) - np.eye(3)))
    assert np.allclose(to_transition_kernel(gk, 10.0), q)
    print("[OK] Adjacency and kernel forms")


def test_validation_messages():
    expect_error(lambda: validate_generator([[-1, 2, -1], [1, -1, 0], [0, 1, -1]]),
                 GeneratorValidationError, "off-diagonal negative at (1,3)")
    expect_error(lambda: validate_generator([[-1, 1], [1, -0.5]]),
                 GeneratorValidationError, "row sum violation at row 2")
    blocks = np.zeros((4, 4))
    blocks[:2, :2] = [[-1, 1], [1, -1]]
    blocks[2:, 2:] = [[-1, 1], [1, -1]]
    expect_error(lambda: validate_generator(blocks), GeneratorValidationError, "not irreducible")
    expect_error(lambda: validate_generator([[-1, 1], [1, -1]], labels=['a', 'a']), GeneratorValidationError)
    assert issubclass(GeneratorValidationError, ValidationError)
    print("[OK] Validation messages name the violated invariant")


def test_validated_generator_is_frozen():
    g = tridiagonal(4, 1.0)
    expect_error(lambda: g.matrix.__setitem__((0, 0), 1.0), ValueError)
    print("[OK] Generator entries are read-only")


def test_transition_kernel():
    g = tridiagonal(3, 1.0)
    q = to_transition_kernel(g, 2.0)
    assert np.allclose(q, [[0.5, 0.5, 0], [0.5, 0, 0.5], [0, 0.5, 0.5]])
    assert np.any(np.isclose(np.diag(q), 0.0))
    expect_error(lambda: to_transition_kernel(g, 1.9), GeneratorValidationError)

    alpha = np.array([1.0, 2.0, 3.0])
    qd = to_transition_kernel(dirichlet_graph(alpha), alpha.sum())
    assert np.allclose(qd, np.tile(alpha / 6.0, (3, 1)))
    for theta in (2.0, 5.0, 40.0):
        qt = to_transition_kernel(g, theta)
        assert np.allclose(g.mu @ qt, g.mu)
        assert np.allclose(qt.sum(axis=1), 1.0)
    print("[OK] Q = I + G/theta")


def test_average():
    w = 2.0 / 29.0
    g1 = dirichlet_graph([w] * 30)
    g2 = tridiagonal(30, 3.0)
    g4 = average([(1.0, g1), (2.5, g2)], 3.5)
    assert np.allclose(g4.matrix, (g1.matrix + 2.5 * g2.matrix) / 3.5, atol=1e-14)
    assert np.allclose(g4.mu, np.full(30, 1 / 30), atol=1e-13)
    assert np.allclose(average([(1.0, g2)], 1.0).matrix, g2.matrix)
    expect_error(lambda: average([(1.0, g1), (1.0, tridiagonal(3, 1.0))], 2.0), GeneratorValidationError)
    print("[OK] Averages of generators")


def test_contingency_product():
    w = 1.5
    f = tridiagonal(2, w)
    g = contingency_product([f, f])
    expected = np.array([
        [-2 * w, w, w, 0],
        [w, -2 * w, 0, w],
        [w, 0, -2 * w, w],
        [0, w, w, -2 * w],
    ])
    assert np.allclose(g.matrix, expected)
    assert g.labels == ('1|1', '1|2', '2|1', '2|2')
    expect_error(lambda: contingency_product([tridiagonal(70, 1.0)] * 2), GeneratorValidationError, "exceeds cap")
    expect_error(lambda: contingency_product([f]), GeneratorValidationError)
    print("[OK] Contingency product is the 2x2 grid graph")


def test_spec_documents():
    spec = loads_spec('{"type": "tridiagonal", "d": 30, "w": 3}')
    g = build(spec)
    assert g.theta_G == 6.0

    d_spec = loads_spec('{"type": "dirichlet", "d": 30, "w": 0.06896551724137931}')
    assert spec_dimension(d_spec) == 30

    text = '''{"type": "average", "divisor": 3.5, "parts": [
        {"coef": 1, "spec": {"type": "dirichlet", "d": 30, "w": 0.06896551724137931}},
        {"coef": 2.5, "spec": {"type": "tridiagonal", "d": 30, "w": 3}}]}'''
    g4 = build(loads_spec(text))
    assert g4.dim == 30

    product = loads_spec('{"type": "contingency", "factors": ['
                         '{"type": "tridiagonal", "d": 2, "w": 1, "labels": ["lo", "hi"]},'
                         '{"type": "wrapped", "d": 3, "w": 1}]}')
    assert spec_dimension(product) == 6
    assert build(product).labels[0] == 'lo|1'

    expect_error(lambda: loads_spec('{"type": "banded", "d": 3}'), SpecDocumentError, "unknown generator type")
    expect_error(lambda: loads_spec('{"type": "tridiagonal", "d": 3, "w": 1, "x": 2}'), SpecDocumentError)
    expect_error(lambda: loads_spec('{"type": "tridiagonal", "d": 3, "w": 0}'), SpecDocumentError)
    expect_error(lambda: loads_spec('{"type": "tridiagonal", "d": 3'), SpecDocumentError)
    expect_error(lambda: parse_spec({"type": "contingency", "factors": [{"type": "tridiagonal", "d": 2, "w": 1}]}),
                 SpecDocumentError)
    print("[OK] Spec documents parse and build")


def test_explicit_round_trip():
    original = average([(1.0, dirichlet_graph([0.3, 1.1, 2.4, 0.7])), (2.5, wrapped_tridiagonal(4, 1.3))], 3.5)
    text = to_spec_document(original)
    assert text == dumps_spec(to_spec(original)) and "explicit" in text
    rebuilt = build(loads_spec(text))
    assert np.array_equal(rebuilt.matrix, original.matrix)
    assert np.allclose(rebuilt.mu, original.mu, atol=1e-15)
    assert rebuilt.theta_G == original.theta_G
    print("[OK] Explicit spec round-trips entry for entry")


if __name__ == '__main__':
    try:
        for name, fn in list(globals().items()):
            if name.startswith('test_') and callable(fn):
                fn()
        print("\n[PASS] ALL GENERATOR TESTS PASSED!")
        sys.exit(0)
    except Exception as e:
        print(f"\n[FAIL] TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
