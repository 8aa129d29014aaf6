from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monocover.dfs_cover import (
    HoleParams,
    cover_from_hamiltonian_path,
    dfs_decompose,
    find_two_disjoint_edges,
    gendfs_cover,
    uncovered_bound,
)
from monocover.graph_core import ColoredGraph, Cover, Graph, VertexSet, edge_count_between, verify_cover
from monocover.oracle import is_complement_Kkm_free


def clique_edges(vs):
    return list(itertools.combinations(vs, 2))


def K(n):
    return Graph(n, clique_edges(range(n)))


def as_colored(G):
    return ColoredGraph(G, 1, [1] * G.num_edges)


def two_k5(bridge=False):
    edges = clique_edges(range(5)) + clique_edges(range(5, 10))
    if bridge:
        edges.append((4, 5))
    return Graph(10, edges)


@st.composite
def graph_and_m(draw):
    n = draw(st.integers(1, 11))
    pairs = clique_edges(range(n))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    m = draw(st.integers(1, n))
    return Graph(n, [e for e, k in zip(pairs, keep) if k]), m


# ---------------------------------------------------------------------------
# DFS decomposition


def test_dfs_edgeless():
    st_ = dfs_decompose(Graph(5), 2)
    assert st_.D.to_list() == [0, 1] and st_.P == () and st_.U.to_list() == [2, 3, 4]


def test_dfs_path():
    G = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    st_ = dfs_decompose(G, 1)
    assert st_.D.to_list() == [4] and st_.P == (0, 1, 2, 3) and len(st_.U) == 0


def test_dfs_k4():
    st_ = dfs_decompose(K(4), 1)
    assert len(st_.D) == 1 and len(st_.P) == 3 and len(st_.U) == 0


def test_dfs_trace_records_steps():
    trace: list[str] = []
    dfs_decompose(Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)]), 1, trace=trace)
    assert trace[0].startswith("1 restart") and trace[-1].split()[1] == "backtrack"
    assert len(trace) == 6


def test_dfs_rejects_large_m():
    with pytest.raises(ValueError):
        dfs_decompose(K(3), 4)


@settings(max_examples=200, deadline=None)
@given(graph_and_m())
def test_dfs_invariants(gm):
    G, m = gm
    s = dfs_decompose(G, m)
    P = VertexSet(G.n, s.P)
    assert len(s.D) == m
    assert len(P) == len(s.P)
    assert edge_count_between(G, s.D, s.U) == 0
    assert s.D.isdisjoint(P) and s.D.isdisjoint(s.U) and P.isdisjoint(s.U)
    assert len(s.D) + len(P) + len(s.U) == G.n
    assert all(G.has_edge(a, b) for a, b in zip(s.P, s.P[1:]))


# ---------------------------------------------------------------------------
# Hamiltonian-path graphs


def test_ham_path_k6():
    cyc = cover_from_hamiltonian_path(K(6), list(range(6)), HoleParams(2, 1))
    assert len(cyc) == 1 and sorted(cyc[0].vertices) == list(range(6))


def test_ham_path_two_k5_bridge():
    G = two_k5(bridge=True)
    cyc = cover_from_hamiltonian_path(G, list(range(10)), HoleParams(3, 1))
    CG = as_colored(G)
    rep = verify_cover(CG, Cover(cyc, VertexSet.full(10)), require_disjoint=True)
    assert len(cyc) <= 2 and rep.valid and rep.uncovered_count <= 3


def test_ham_path_rejects_bad_path():
    with pytest.raises(ValueError):
        cover_from_hamiltonian_path(Graph(3, [(0, 1)]), [0, 1, 2], HoleParams(2, 1))
    with pytest.raises(ValueError):
        cover_from_hamiltonian_path(K(3), [0, 1], HoleParams(2, 1))


# ---------------------------------------------------------------------------
# two disjoint edges


def test_two_edges_k4():
    te = find_two_disjoint_edges(K(4), [VertexSet(4, [0, 1]), VertexSet(4, [2, 3])], HoleParams(2, 1))
    assert te is not None and (te.i, te.j) == (0, 1)
    assert {te.e1, te.e2} == {(0, 2), (1, 3)}


def test_two_edges_k33():
    G = Graph(6, [(a, b) for a in range(3) for b in range(3, 6)])
    te = find_two_disjoint_edges(G, [VertexSet(6, [0, 1, 2]), VertexSet(6, [3, 4, 5])], HoleParams(2, 1))
    assert te is not None
    assert len({*te.e1, *te.e2}) == 4
    assert all(G.has_edge(*e) for e in (te.e1, te.e2))


def test_two_edges_none_without_cross_edges():
    G = Graph(4, [(0, 1), (2, 3)])
    assert find_two_disjoint_edges(G, [VertexSet(4, [0, 1]), VertexSet(4, [2, 3])], HoleParams(2, 1)) is None


def test_two_edges_argument_checks():
    with pytest.raises(ValueError):
        find_two_disjoint_edges(K(4), [VertexSet(4, [0]), VertexSet(4, [2, 3])], HoleParams(2, 1))
    with pytest.raises(ValueError):
        find_two_disjoint_edges(K(4), [VertexSet(4, [0, 1]), VertexSet(4, [1, 2])], HoleParams(2, 1))
    with pytest.raises(ValueError):
        find_two_disjoint_edges(K(4), [VertexSet(4, [0, 1])], HoleParams(2, 1))


# ---------------------------------------------------------------------------
# gendfs


def test_gendfs_k8():
    cov = gendfs_cover(K(8), HoleParams(2, 1))
    rep = verify_cover(as_colored(K(8)), cov, require_disjoint=True)
    assert len(cov.cycles) == 1 and rep.valid and rep.uncovered_count <= 4


def test_gendfs_two_k5():
    G = two_k5()
    assert is_complement_Kkm_free(G, 3, 1)
    cov = gendfs_cover(G, HoleParams(3, 1))
    rep = verify_cover(as_colored(G), cov, require_disjoint=True)
    assert len(cov.cycles) <= 2 and rep.valid and rep.uncovered_count <= uncovered_bound(HoleParams(3, 1))
    assert rep.uncovered_count == 0


def test_gendfs_edgeless():
    cov = gendfs_cover(Graph(6), HoleParams(2, 1))
    assert cov.cycles == [] and len(cov.uncovered) == 6


def test_gendfs_within_restricts():
    cov = gendfs_cover(K(8), HoleParams(2, 1), within=VertexSet(8, [1, 3, 5, 7]))
    assert all(set(c.vertices) <= {1, 3, 5, 7} for c in cov.cycles)


def test_uncovered_bound_formula():
    assert uncovered_bound(HoleParams(3, 1)) == 2 * 9 + 27


@settings(max_examples=150, deadline=None)
@given(graph_and_m(), st.sampled_from([(2, 1), (2, 2), (3, 1), (3, 2)]))
def test_gendfs_output_always_valid(gm, km):
    G, _ = gm
    k, m = km
    cov = gendfs_cover(G, HoleParams(k, m))
    rep = verify_cover(as_colored(G), cov, require_disjoint=True)
    assert rep.valid
    assert all(len(c.vertices) >= 3 for c in cov.cycles)
    assert len(cov.cycles) <= k - 1
    if is_complement_Kkm_free(G, k, m):
        assert rep.uncovered_count <= uncovered_bound(HoleParams(k, m))
