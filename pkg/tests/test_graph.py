import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilience_uq.errors import (
    DuplicateEdge,
    EmptyGraph,
    GraphFormatError,
    IndexOutOfRange,
    NonpositiveFactor,
    NonpositiveWeight,
    SelfLoop,
)
from resilience_uq.graph import (
    build_graph,
    generate_random_graph,
    mean_weight,
    read_graph,
    scale_weights,
    write_graph,
)


def test_single_edge():
    g = build_graph(2, [(0, 1, 1.0)])
    assert g.m == 1
    assert g.weight(0, 1) == 1.0
    assert g.weight(1, 0) is None
    assert g.has_edge(0, 1) and not g.has_edge(1, 0)


def test_duplicate_rejected():
    with pytest.raises(DuplicateEdge):
        build_graph(3, [(0, 1, 1.0), (0, 1, 2.0)])


def test_empty_graph():
    g = build_graph(1, [])
    assert g.m == 0
    with pytest.raises(EmptyGraph):
        mean_weight(g)


@pytest.mark.parametrize("edges, exc", [
    ([(0, 3, 1.0)], IndexOutOfRange),
    ([(-1, 0, 1.0)], IndexOutOfRange),
    ([(0, 1, 0.0)], NonpositiveWeight),
    ([(0, 1, -2.0)], NonpositiveWeight),
    ([(1, 1, 1.0)], SelfLoop),
])
def test_invalid_edges(edges, exc):
    with pytest.raises(exc):
        build_graph(3, edges)


def test_mean_weight_examples():
    assert mean_weight(build_graph(3, [(0, 1, 1.0), (1, 2, 3.0)])) == 2.0
    assert mean_weight(build_graph(2, [(1, 0, 5.0)])) == 5.0
    assert math.isclose(mean_weight(generate_random_graph(100, 0.1, 0.77, seed=1)), 0.77)


def test_generator_complete_pair():
    g = generate_random_graph(2, 1.0, 1.0, seed=0)
    assert g.m == 2


def test_generator_deterministic():
    a = generate_random_graph(50, 0.1, seed=7)
    b = generate_random_graph(50, 0.1, seed=7)
    assert a == b
    assert a.edges != generate_random_graph(50, 0.1, seed=8).edges


def test_generator_edge_count():
    g = generate_random_graph(100, 0.1, seed=3)
    mean = 100 * 99 * 0.1
    sd = math.sqrt(100 * 99 * 0.1 * 0.9)
    assert abs(g.m - mean) < 4 * sd
    assert all(s != d for s, d, _ in g.edges)


def test_scale_weights():
    g = build_graph(3, [(0, 1, 1.0), (1, 2, 2.0)])
    assert list(scale_weights(g, 2.0).weights) == [2.0, 4.0]
    assert scale_weights(g, 1.0) == g
    h = build_graph(3, [(0, 1, 0.5), (2, 1, 1.5)])
    assert math.isclose(mean_weight(scale_weights(h, 3.0)), 3.0)
    with pytest.raises(NonpositiveFactor):
        scale_weights(g, 0.0)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(0.01, 100.0), min_size=1, max_size=20),
    st.floats(1e-3, 1e3),
)
def test_scale_linearity(ws, c):
    g = build_graph(len(ws) + 1, [(0, i + 1, w) for i, w in enumerate(ws)])
    assert math.isclose(mean_weight(scale_weights(g, c)), c * mean_weight(g), rel_tol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.data())
def test_build_accepts_all_valid(n, data):
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    chosen = data.draw(st.lists(st.sampled_from(pairs), unique=True))
    ws = data.draw(st.lists(st.floats(1e-6, 1e6), min_size=len(chosen), max_size=len(chosen)))
    g = build_graph(n, [(s, d, w) for (s, d), w in zip(chosen, ws)])
    assert g.m == len(chosen)
    for (s, d), w in zip(chosen, ws):
        assert g.weight(s, d) == w


def test_in_degree_direction():
    g = build_graph(3, [(0, 1, 1.0), (2, 1, 1.0), (1, 0, 1.0)])
    assert list(g.in_degree()) == [1, 2, 0]


def test_file_round_trip(tmp_path):
    g = generate_random_graph(20, 0.2, 0.37, seed=5)
    p = tmp_path / "g.txt"
    write_graph(g, p)
    assert read_graph(p) == g


@pytest.mark.parametrize("text, line", [
    ("2 1\n0 1\n", 2),
    ("2 1\n0 x 1.0\n", 2),
    ("2 2\n0 1 1.0\n", 1),
    ("2 1\n1 1 1.0\n", 2),
    ("2 2\n0 1 1.0\n0 1 2.0\n", 3),
    ("two 1\n0 1 1.0\n", 1),
    ("2 1\n0 1 -1.0\n", 2),
])
def test_file_errors_carry_line(tmp_path, text, line):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(GraphFormatError, match=f":{line}:"):
        read_graph(p)


def test_weights_array_matches_edges():
    g = generate_random_graph(30, 0.3, 2.0, seed=11)
    assert np.all(g.weights == 2.0)
    assert g.src.shape == g.dst.shape == (g.m,)
