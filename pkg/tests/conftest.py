import numpy as np
import pytest

from graphquant.graphs import AttributedGraph, pad_to_order

ACCEPTANCE_LINES: list[str] = []


def random_graph(rng, m, r, p_edge=0.5, gid="g", label=""):
    nodes = rng.normal(size=(m, r))
    edges = {}
    for i in range(m):
        for j in range(i + 1, m):
            if rng.random() < p_edge:
                edges[(i, j)] = rng.normal(size=r)
    return AttributedGraph(gid, nodes, edges, label=label)


def random_rep(rng, n, r, m=None, p_edge=0.5):
    """Padded representation of a random graph of order m <= n."""
    m = n if m is None else m
    return pad_to_order(random_graph(rng, m, r, p_edge), n)


def scalar_reps(values):
    return [np.array([[[float(v)]]]) for v in values]


def scalar_competitive_learning(values, codes, cycles, seed):
    """1-D reference: nearest code wins, harmonic rate, shuffled passes."""
    rng = np.random.default_rng(seed)
    codes = list(codes)
    wins = [0] * len(codes)
    for _ in range(cycles):
        for i in rng.permutation(len(values)):
            j = min(range(len(codes)), key=lambda c: (abs(values[i] - codes[c]), c))
            wins[j] += 1
            codes[j] += (values[i] - codes[j]) / wins[j]
    return sorted(codes)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
