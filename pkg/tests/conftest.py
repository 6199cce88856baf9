import numpy as np
import pytest
from hypothesis import strategies as st

from gradual_wl import Dataset, Graph


def random_graph(rng, n, p, n_labels=1, n_edge_labels=0):
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    edges = np.column_stack([iu[keep], ju[keep]])
    labels = rng.integers(0, n_labels, size=n)
    elabels = rng.integers(0, n_edge_labels, size=len(edges)) if n_edge_labels else None
    return Graph.from_edge_list(n, edges, labels, elabels)


@st.composite
def graphs(draw, min_n=1, max_n=12, max_labels=3, edge_labels=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [e for e, m in zip(pairs, mask) if m]
    n_labels = draw(st.integers(1, max_labels))
    labels = draw(st.lists(st.integers(0, n_labels - 1), min_size=n, max_size=n))
    elabels = None
    if edge_labels:
        elabels = draw(st.lists(st.integers(0, 2), min_size=len(edges), max_size=len(edges)))
    return Graph.from_edge_list(n, edges, labels, elabels)


def path(n, labels=None):
    return Graph.from_edge_list(n, [(i, i + 1) for i in range(n - 1)], labels)


def cycle(n, labels=None):
    return Graph.from_edge_list(n, [(i, (i + 1) % n) for i in range(n)], labels)


def triangle(labels=None):
    return cycle(3, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_triangles():
    return Dataset([triangle(), triangle()], [0, 1], name="TT")


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
