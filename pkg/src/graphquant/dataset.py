"""Graph datasets: JSON-lines I/O and a distorted-prototype generator.

One graph per line::

    {"id": "A-0", "label": "A", "r": 2, "nodes": [[0.0, 1.0], ...], "edges": [[0, 1, [1.0, 1.0]], ...]}
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .graphs import AttributedGraph, pad_to_order


class DatasetError(ValueError):
    pass


@dataclass
class Dataset:
    graphs: list[AttributedGraph]

    def __post_init__(self):
        if not self.graphs:
            raise DatasetError("empty dataset")
        dims = {g.attr_dim for g in self.graphs}
        if len(dims) != 1:
            raise DatasetError(f"inconsistent attribute dimensions {sorted(dims)}")

    @property
    def attr_dim(self) -> int:
        return self.graphs[0].attr_dim

    @property
    def max_order(self) -> int:
        return max(g.order for g in self.graphs)

    @property
    def has_labels(self) -> bool:
        return any(g.label for g in self.graphs)

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.graphs]

    def __len__(self) -> int:
        return len(self.graphs)

    def representations(self, n: int | None = None) -> list[np.ndarray]:
        n = self.max_order if n is None else n
        return [pad_to_order(g, n) for g in self.graphs]


def graph_to_record(g: AttributedGraph) -> dict:
    rec = {
        "id": g.id,
        "label": g.label,
        "r": g.attr_dim,
        "nodes": [[float(v) for v in row] for row in g.nodes],
        "edges": [[i, j, [float(v) for v in attr]] for (i, j), attr in sorted(g.edges.items())],
    }
    if g.directed:
        rec["directed"] = True
    return rec


def graph_from_record(rec: dict) -> AttributedGraph:
    for key in ("id", "r", "nodes"):
        if key not in rec:
            raise DatasetError(f"missing field {key!r}")
    gid = str(rec["id"])
    r = rec["r"]
    if not isinstance(r, int) or r < 1:
        raise DatasetError(f"graph {gid!r}: r must be a positive integer")
    nodes = rec["nodes"]
    if not nodes or any(len(row) != r for row in nodes):
        raise DatasetError(f"graph {gid!r}: every vertex attribute must have length r={r}")
    edges = {}
    for entry in rec.get("edges", []):
        if len(entry) != 3:
            raise DatasetError(f"graph {gid!r}: edge entries are [u, v, [attrs]]")
        u, v, attr = entry
        if len(attr) != r:
            raise DatasetError(f"graph {gid!r}: edge ({u}, {v}) attribute must have length r={r}")
        if not (0 <= u < len(nodes) and 0 <= v < len(nodes)):
            raise DatasetError(f"graph {gid!r}: edge ({u}, {v}) endpoint out of range [0, {len(nodes)})")
        edges[(u, v)] = attr
    try:
        return AttributedGraph(
            id=gid,
            label=str(rec.get("label", "")),
            nodes=np.asarray(nodes, dtype=float),
            edges=edges,
            directed=bool(rec.get("directed", False)),
        )
    except ValueError as exc:
        raise DatasetError(str(exc)) from exc


def dumps(dataset: Dataset) -> str:
    return "".join(json.dumps(graph_to_record(g)) + "\n" for g in dataset.graphs)


def loads(text: str, source: str = "<string>") -> Dataset:
    graphs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{source}:{lineno}: parse error: {exc.msg}") from exc
        if not isinstance(rec, dict):
            raise DatasetError(f"{source}:{lineno}: expected a JSON object")
        try:
            graphs.append(graph_from_record(rec))
        except DatasetError as exc:
            raise DatasetError(f"{source}:{lineno}: {exc}") from exc
    if not graphs:
        raise DatasetError(f"{source}: empty dataset")
    return Dataset(graphs)


def load(path: str | os.PathLike) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), source=str(path))


def save(dataset: Dataset, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(dataset))


def generate_synthetic(
    prototypes: list[AttributedGraph],
    copies: int,
    noise_sigma: float,
    edge_flip_prob: float,
    seed: int = 0,
) -> Dataset:
    """Distorted copies of each prototype, labelled with the prototype id.

    Attributes get additive Gaussian noise; every vertex pair toggles its
    edge with probability ``edge_flip_prob``.  Inserted edges carry the
    prototype's mean edge attribute (all ones if it has no edges).
    """
    if copies < 1:
        raise ValueError("copies must be >= 1")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    if not 0.0 <= edge_flip_prob <= 1.0:
        raise ValueError("edge_flip_prob must lie in [0, 1]")
    if not prototypes:
        raise ValueError("need at least one prototype")

    seeds = np.random.SeedSequence(seed).spawn(len(prototypes) * copies)
    graphs = []
    for p_idx, proto in enumerate(prototypes):
        m, r = proto.nodes.shape
        if proto.edges:
            fill = np.mean(list(proto.edges.values()), axis=0)
        else:
            fill = np.ones(r)
        if proto.directed:
            pairs = [(i, j) for i in range(m) for j in range(m) if i != j]
        else:
            pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        for c in range(copies):
            rng = np.random.default_rng(seeds[p_idx * copies + c])
            nodes = proto.nodes + rng.normal(0.0, noise_sigma, size=proto.nodes.shape)
            flips = rng.random(len(pairs)) < edge_flip_prob
            noise = rng.normal(0.0, noise_sigma, size=(len(pairs), r))
            edges = {}
            for (pair, flip, eps) in zip(pairs, flips, noise):
                present = pair in proto.edges
                if present != flip:
                    base = proto.edges[pair] if present else fill
                    edges[pair] = base + eps
            graphs.append(
                AttributedGraph(
                    id=f"{proto.id}-{c}",
                    label=proto.id,
                    nodes=nodes,
                    edges=edges,
                    directed=proto.directed,
                )
            )
    return Dataset(graphs)


def demo_prototypes() -> list[AttributedGraph]:
    """Three letter-like order-4 line drawings (vertex = 2-D end point, edge weight 1)."""
    one = [1.0, 1.0]
    return [
        # "Z": zig-zag path
        AttributedGraph("Z", [[0.0, 2.0], [2.0, 2.0], [0.0, 0.0], [2.0, 0.0]],
                        {(0, 1): one, (1, 2): one, (2, 3): one}),
        # "T": star around the junction
        AttributedGraph("T", [[1.0, 1.8], [-0.8, 1.8], [2.8, 1.8], [1.0, -2.2]],
                        {(0, 1): one, (0, 2): one, (0, 3): one}),
        # "N": closed quadrilateral
        AttributedGraph("N", [[4.0, -1.0], [4.0, 3.0], [6.5, -1.0], [6.5, 3.0]],
                        {(0, 1): one, (1, 2): one, (2, 3): one, (0, 3): one}),
    ]
