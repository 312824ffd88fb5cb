import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphquant.graphs import (
    AttributedGraph,
    DimensionError,
    OrderOverflowError,
    inverse,
    pad_to_order,
    permute,
    representation_distance,
    restrict,
)

from conftest import random_graph, random_rep


def naive_distance(x, y):
    total = 0.0
    n, _, r = x.shape
    for i in range(n):
        for j in range(n):
            for c in range(r):
                total += (x[i, j, c] - y[i, j, c]) ** 2
    return total ** 0.5


def test_pad_order_two_into_three():
    g = AttributedGraph("g", [[1.0], [2.0]], {(0, 1): [1.0]})
    x = pad_to_order(g, 3)
    expected = np.zeros((3, 3, 1))
    expected[0, 0] = 1
    expected[1, 1] = 2
    expected[0, 1] = expected[1, 0] = 1
    np.testing.assert_array_equal(x, expected)


def test_pad_identity_order():
    g = AttributedGraph("g", [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], {(0, 2): [7.0, 8.0]})
    x = pad_to_order(g, 3)
    assert x.shape == (3, 3, 2)
    np.testing.assert_array_equal(x[[0, 1, 2], [0, 1, 2]], g.nodes)


def test_pad_edgeless_vertex():
    x = pad_to_order(AttributedGraph("g", [[5.0]]), 2)
    np.testing.assert_array_equal(x[..., 0], [[5.0, 0.0], [0.0, 0.0]])


def test_pad_too_small():
    g = AttributedGraph("g", [[1.0], [2.0]])
    with pytest.raises(OrderOverflowError):
        pad_to_order(g, 1)


def test_directed_graph_not_symmetrized():
    g = AttributedGraph("g", [[1.0], [2.0]], {(1, 0): [3.0]}, directed=True)
    x = pad_to_order(g)
    assert x[1, 0, 0] == 3.0 and x[0, 1, 0] == 0.0


@pytest.mark.parametrize(
    "edges, message",
    [({(0, 2): [1.0]}, "outside"), ({(1, 1): [1.0]}, "self-loop"), ({(0, 1): [1.0, 2.0]}, "length")],
)
def test_graph_validation(edges, message):
    with pytest.raises(ValueError, match=message):
        AttributedGraph("bad", [[1.0], [2.0]], edges)


def test_permute_identity(rng):
    x = random_rep(rng, 4, 2)
    np.testing.assert_array_equal(permute(x, np.arange(4)), x)


def test_permute_swap_by_hand():
    x = np.array([[[1.0], [7.0]], [[8.0], [2.0]]])
    out = permute(x, [1, 0])
    np.testing.assert_array_equal(out[..., 0], [[2.0, 8.0], [7.0, 1.0]])


def test_permute_cell_mapping(rng):
    x = rng.normal(size=(5, 5, 2))
    p = rng.permutation(5)
    out = permute(x, p)
    for i in range(5):
        for j in range(5):
            np.testing.assert_array_equal(out[p[i], p[j]], x[i, j])


def test_permute_inverse_roundtrip(rng):
    x = random_rep(rng, 6, 3)
    p = rng.permutation(6)
    np.testing.assert_array_equal(permute(permute(x, p), inverse(p)), x)


def test_permute_length_mismatch():
    with pytest.raises(DimensionError):
        permute(np.zeros((3, 3, 1)), [0, 1])


def test_distance_examples():
    x = np.zeros((2, 2, 1))
    x[0, 0], x[1, 1] = 1, 2
    y = x.copy()
    y[1, 1] = 3
    assert representation_distance(x, x) == 0.0
    assert representation_distance(x, y) == 1.0


def test_distance_matches_naive_loop(rng):
    for _ in range(20):
        x, y = rng.normal(size=(3, 3, 2)), rng.normal(size=(3, 3, 2))
        assert representation_distance(x, y) == pytest.approx(naive_distance(x, y), rel=1e-12)


def test_distance_shape_mismatch():
    with pytest.raises(DimensionError):
        representation_distance(np.zeros((2, 2, 1)), np.zeros((3, 3, 1)))


arrays = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s).normal(size=(3, 3, 2)))


@settings(max_examples=60, deadline=None)
@given(arrays, arrays, arrays)
def test_distance_is_metric(x, y, z):
    assert representation_distance(x, x) == 0.0
    assert representation_distance(x, y) == representation_distance(y, x)
    assert representation_distance(x, z) <= representation_distance(x, y) + representation_distance(y, z) + 1e-9
    if not np.array_equal(x, y):
        assert representation_distance(x, y) > 0


@settings(max_examples=60, deadline=None)
@given(arrays, arrays, st.permutations(range(3)))
def test_permutation_preserves_distance(x, y, p):
    d = representation_distance(x, y)
    assert representation_distance(permute(x, p), permute(y, p)) == pytest.approx(d, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(0, 3), st.integers(1, 3))
def test_pad_then_restrict_recovers_attributes(seed, m, extra, r):
    g = random_graph(np.random.default_rng(seed), m, r)
    nodes, edges = restrict(pad_to_order(g, m + extra), m)
    np.testing.assert_array_equal(nodes, g.nodes)
    assert edges.keys() == {k for k, v in g.edges.items() if np.any(v != 0)}
    for key, attr in edges.items():
        np.testing.assert_array_equal(attr, g.edges[key])
