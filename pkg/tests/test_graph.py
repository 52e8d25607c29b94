import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agreeclust.graph import (build_graph, induced_degree, intersection_size,
                              load_edge_list, sym_diff_size)

from conftest import k_complete, path_graph


def test_build_path_adds_self_loops(path3):
    assert list(path3.degrees) == [2, 3, 2]
    assert list(path3.neighbors(0)) == [0, 1]
    assert list(path3.neighbors(1)) == [0, 1, 2]
    assert list(path3.neighbors(2)) == [1, 2]


def test_isolated_vertex_keeps_self_loop():
    g = build_graph(1, [])
    assert g.degree(0) == 1
    assert list(g.neighbors(0)) == [0]


def test_complete_graph_symmetric(k4):
    for v in range(4):
        assert list(k4.neighbors(v)) == [0, 1, 2, 3]
    assert list(k4.degrees) == [4, 4, 4, 4]


def test_duplicates_and_self_pairs_collapse():
    g = build_graph(3, [(0, 1), (1, 0), (0, 1), (2, 2)])
    assert g.m_plus == 1
    assert list(g.neighbors(2)) == [2]


def test_out_of_range_vertex_rejected():
    with pytest.raises(ValueError, match=r"\(1, 5\)"):
        build_graph(3, [(0, 1), (1, 5)])


def test_sym_diff_examples(path3, k4):
    assert sym_diff_size(path3, 1, 1) == 0
    for u in range(4):
        for v in range(4):
            assert sym_diff_size(k4, u, v) == 0
    assert sym_diff_size(path3, 0, 1) == 1
    assert sym_diff_size(path3, 0, 2) == 2


def test_intersection_examples(path3):
    assert intersection_size(path3, 1, 1) == path3.degree(1)
    assert intersection_size(path3, 0, 2) == 1
    two_edges = build_graph(4, [(0, 1), (2, 3)])
    assert intersection_size(two_edges, 0, 2) == 0


def test_induced_degree_examples(path3):
    assert induced_degree(path3, 1, range(3)) == path3.degree(1)
    assert induced_degree(path3, 1, set()) == 0
    assert induced_degree(path3, 1, {0, 2}) == 2


@st.composite
def random_graph(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    edges = draw(st.lists(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=40))
    return build_graph(n, edges)


@given(random_graph())
@settings(max_examples=60, deadline=None)
def test_sym_diff_intersection_identity(g):
    rng = np.random.default_rng(0)
    for _ in range(10):
        u, v = rng.integers(0, g.n, size=2)
        lhs = sym_diff_size(g, int(u), int(v)) + 2 * intersection_size(g, int(u), int(v))
        assert lhs == g.degree(int(u)) + g.degree(int(v))


@given(random_graph())
@settings(max_examples=40, deadline=None)
def test_sym_diff_triangle_inequality(g):
    rng = np.random.default_rng(1)
    for _ in range(8):
        a, b, c = rng.integers(0, g.n, size=3)
        ab = sym_diff_size(g, int(a), int(b))
        bc = sym_diff_size(g, int(b), int(c))
        ac = sym_diff_size(g, int(a), int(c))
        assert ac <= ab + bc


@given(random_graph())
@settings(max_examples=40, deadline=None)
def test_build_graph_idempotent(g):
    eu, ev = g.edge_arrays()
    rebuilt = build_graph(g.n, np.column_stack([eu, ev]))
    assert np.array_equal(rebuilt.indptr, g.indptr)
    assert np.array_equal(rebuilt.indices, g.indices)


def test_load_edge_list_remaps_and_tolerates(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("# header\n10 20\n20 30\n10 20\n30 30\n\n20 10\n")
    g = load_edge_list(path)
    assert g.n == 3
    assert list(g.original_ids) == [10, 20, 30]
    assert g.m_plus == 2  # (10,20) and (20,30), duplicates and loop dropped


def test_load_edge_list_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 1\n2\n")
    with pytest.raises(ValueError, match="bad.txt:2"):
        load_edge_list(path)


def test_path_graph_helper_matches_manual():
    assert np.array_equal(path_graph(3).indices, build_graph(3, [(0, 1), (1, 2)]).indices)
    assert k_complete(4).m_plus == 6
