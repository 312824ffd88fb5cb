"""Attributed graphs and their dense tensor representations.

A graph of order ``m`` with ``r``-dimensional attributes is lifted to an
``n x n x r`` array (``n >= m``): vertex attributes sit on the diagonal,
edge attributes off the diagonal, and every non-edge (including the padding
vertices) carries the zero attribute.  Permutations act by simultaneous
row/column reordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class OrderOverflowError(ValueError):
    """Raised when a graph does not fit into the requested order."""


class DimensionError(ValueError):
    """Raised on incompatible representation or permutation shapes."""


@dataclass
class AttributedGraph:
    """Sparse attributed graph.

    ``nodes`` is an ``(m, r)`` array.  ``edges`` maps a vertex pair to its
    attribute vector; undirected graphs store each pair once as ``(i, j)``
    with ``i < j``.
    """

    id: str
    nodes: np.ndarray
    edges: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    label: str = ""
    directed: bool = False

    def __post_init__(self):
        self.nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        if self.nodes.shape[0] == 0 or self.nodes.shape[1] == 0:
            raise ValueError(f"graph {self.id!r}: needs at least one vertex and r >= 1")
        m, r = self.nodes.shape
        edges = {}
        for (i, j), attr in self.edges.items():
            i, j = int(i), int(j)
            if not (0 <= i < m and 0 <= j < m):
                raise ValueError(f"graph {self.id!r}: edge ({i}, {j}) has endpoint outside [0, {m})")
            if i == j:
                raise ValueError(f"graph {self.id!r}: self-loop at vertex {i}")
            attr = np.asarray(attr, dtype=float).reshape(-1)
            if attr.shape[0] != r:
                raise ValueError(
                    f"graph {self.id!r}: edge ({i}, {j}) attribute has length {attr.shape[0]}, expected {r}"
                )
            key = (i, j) if self.directed else (min(i, j), max(i, j))
            if key in edges:
                raise ValueError(f"graph {self.id!r}: duplicate edge {key}")
            edges[key] = attr
        self.edges = edges

    @property
    def order(self) -> int:
        return self.nodes.shape[0]

    @property
    def attr_dim(self) -> int:
        return self.nodes.shape[1]

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.order, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


def pad_to_order(g: AttributedGraph, n: int | None = None) -> np.ndarray:
    """Return the dense ``(n, n, r)`` representation of ``g``."""
    if n is None:
        n = g.order
    if n < g.order:
        raise OrderOverflowError(f"graph {g.id!r} has order {g.order} > {n}")
    x = np.zeros((n, n, g.attr_dim))
    idx = np.arange(g.order)
    x[idx, idx] = g.nodes
    for (i, j), attr in g.edges.items():
        x[i, j] = attr
        if not g.directed:
            x[j, i] = attr
    return x


def permute(x: np.ndarray, perm) -> np.ndarray:
    """Apply ``perm`` so that ``out[perm[i], perm[j]] == x[i, j]``."""
    perm = np.asarray(perm, dtype=int)
    if x.ndim != 3 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"expected an (n, n, r) representation, got shape {x.shape}")
    if perm.shape != (x.shape[0],):
        raise DimensionError(f"permutation of length {perm.shape} for order {x.shape[0]}")
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return x[np.ix_(inv, inv)]


def inverse(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=int)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def is_permutation(perm) -> bool:
    perm = np.asarray(perm)
    return perm.ndim == 1 and np.array_equal(np.sort(perm), np.arange(perm.size))


def representation_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Euclidean norm of ``x - y`` over all ``n*n*r`` entries."""
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    return float(np.sqrt(np.sum((x - y) ** 2)))


def restrict(x: np.ndarray, m: int) -> tuple[np.ndarray, dict[tuple[int, int], np.ndarray]]:
    """Read back vertex and (upper-triangular) edge attributes of the leading ``m x m`` block."""
    nodes = x[np.arange(m), np.arange(m)].copy()
    edges = {}
    for i in range(m):
        for j in range(i + 1, m):
            if np.any(x[i, j] != 0):
                edges[(i, j)] = x[i, j].copy()
    return nodes, edges
