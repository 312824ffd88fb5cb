import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphquant.dataset import (
    Dataset,
    DatasetError,
    demo_prototypes,
    dumps,
    generate_synthetic,
    load,
    loads,
    save,
)
from graphquant.graphs import AttributedGraph, pad_to_order
from graphquant.matching import exact_distance

from conftest import random_graph


def test_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(DatasetError, match="empty"):
        load(path)


def test_single_graph_roundtrip(tmp_path):
    g = AttributedGraph("x", [[0.1, 1 / 3], [2.0, -0.0]], {(0, 1): [1e-300, 7.25]}, label="A")
    path = tmp_path / "one.jsonl"
    save(Dataset([g]), path)
    first = path.read_bytes()
    back = load(path)
    save(back, path)
    assert path.read_bytes() == first
    np.testing.assert_array_equal(back.graphs[0].nodes, g.nodes)
    assert back.graphs[0].label == "A"


def test_endpoint_out_of_range_names_graph():
    line = json.dumps({"id": "bad-7", "label": "", "r": 1, "nodes": [[1.0], [2.0]], "edges": [[0, 2, [1.0]]]})
    with pytest.raises(DatasetError, match="bad-7"):
        loads(line)


def test_parse_error_has_line_number():
    good = json.dumps({"id": "a", "r": 1, "nodes": [[1.0]], "edges": []})
    with pytest.raises(DatasetError, match=":2:"):
        loads(good + "\n{not json\n")


def test_inconsistent_r():
    a = json.dumps({"id": "a", "r": 1, "nodes": [[1.0]], "edges": []})
    b = json.dumps({"id": "b", "r": 2, "nodes": [[1.0, 2.0]], "edges": []})
    with pytest.raises(DatasetError, match="inconsistent"):
        loads(a + "\n" + b)


def test_attribute_length_checked():
    line = json.dumps({"id": "a", "r": 2, "nodes": [[1.0]], "edges": []})
    with pytest.raises(DatasetError, match="length"):
        loads(line)


def test_dataset_properties():
    data = loads(dumps(Dataset([AttributedGraph("a", [[1.0]]), AttributedGraph("b", [[1.0], [2.0]], label="L")])))
    assert data.max_order == 2 and data.attr_dim == 1 and data.has_labels
    assert [x.shape for x in data.representations()] == [(2, 2, 1), (2, 2, 1)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_save_load_identity(seed, count):
    rng = np.random.default_rng(seed)
    graphs = [random_graph(rng, int(rng.integers(1, 6)), 2, gid=f"g{i}", label=f"c{i % 2}") for i in range(count)]
    text = dumps(Dataset(graphs))
    assert dumps(loads(text)) == text


def test_synthetic_exact_copies():
    protos = demo_prototypes()
    data = generate_synthetic(protos, 3, 0.0, 0.0, seed=1)
    for g in data.graphs:
        proto = next(p for p in protos if p.id == g.label)
        assert exact_distance(pad_to_order(proto), pad_to_order(g)).cost == 0.0


def test_synthetic_counts():
    data = generate_synthetic(demo_prototypes(), 5, 0.1, 0.1, seed=2)
    assert len(data) == 15
    assert sorted(data.labels) == sorted(["Z", "T", "N"] * 5)


def test_synthetic_reproducible():
    a = generate_synthetic(demo_prototypes(), 4, 0.2, 0.3, seed=8)
    b = generate_synthetic(demo_prototypes(), 4, 0.2, 0.3, seed=8)
    assert dumps(a) == dumps(b)
    assert dumps(a) != dumps(generate_synthetic(demo_prototypes(), 4, 0.2, 0.3, seed=9))


def test_synthetic_edge_flip_inserts_mean_attribute():
    proto = AttributedGraph("P", [[0.0], [1.0], [2.0]], {(0, 1): [3.0]})
    data = generate_synthetic([proto], 1, 0.0, 1.0, seed=0)
    assert set(data.graphs[0].edges) == {(0, 2), (1, 2)}
    assert all(v[0] == 3.0 for v in data.graphs[0].edges.values())


@pytest.mark.parametrize("args", [(0, 0.1, 0.0), (2, -1.0, 0.0), (2, 0.1, 1.5)])
def test_synthetic_argument_checks(args):
    with pytest.raises(ValueError):
        generate_synthetic(demo_prototypes(), *args)


def test_synthetic_nearest_prototype_is_own():
    protos = demo_prototypes()
    reps = {p.id: pad_to_order(p, 4) for p in protos}
    data = generate_synthetic(protos, 34, 0.05, 0.0, seed=11)
    assert len(data) >= 100
    for g in data.graphs:
        x = pad_to_order(g, 4)
        nearest = min(reps, key=lambda pid: exact_distance(reps[pid], x).cost)
        assert nearest == g.label
