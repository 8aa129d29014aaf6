from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monocover.approx_cover import (
    ApproxParams,
    HallViolation,
    approx_cover_small_set,
    build_auxiliary_graph_Hi,
    edge_density,
    lift_auxiliary_cycles,
    majority_color_partition,
)
from monocover.gnp_gen import GnpParams, color_uniform, sample_gnp
from monocover.graph_core import ColoredGraph, Cycle, VertexSet, is_valid_mono_cycle, verify_cover


def mono_clique(n):
    return ColoredGraph.from_colored_edges(n, 1, [(a, b, 1) for a, b in itertools.combinations(range(n), 2)])


def test_majority_strict():
    # v=0 in W; U={1..4}: three color-1 edges, one color-2 edge
    CG = ColoredGraph.from_colored_edges(5, 2, [(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 2)])
    parts = majority_color_partition(CG, VertexSet(5, [0]))
    assert parts[0].to_list() == [0] and len(parts[1]) == 0


def test_majority_tie_goes_to_lowest_color():
    CG = ColoredGraph.from_colored_edges(5, 2, [(0, 1, 1), (0, 2, 1), (0, 3, 2), (0, 4, 2)])
    assert majority_color_partition(CG, VertexSet(5, [0]))[0].to_list() == [0]


def test_majority_isolated_vertex():
    CG = ColoredGraph.from_colored_edges(4, 3, [(1, 2, 3)])
    parts = majority_color_partition(CG, VertexSet(4, [0]))
    assert parts[0].to_list() == [0]


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 40), st.integers(1, 4), st.integers(0, 10_000))
def test_majority_partitions_w(n, r, seed):
    CG = color_uniform(sample_gnp(GnpParams(n, 0.4, seed)), r, seed)
    W = VertexSet(n, range(0, n, 2))
    parts = majority_color_partition(CG, W)
    assert len(parts) == r
    acc = 0
    for i, P in enumerate(parts, start=1):
        assert acc & P.bits == 0
        acc |= P.bits
        U = W.complement()
        for v in P:
            deg = [(CG.adj(v, c) & U.bits).bit_count() for c in range(1, r + 1)]
            assert deg[i - 1] == max(deg) and deg.index(max(deg)) == i - 1
    assert acc == W.bits


def test_aux_threshold_inclusive():
    # 0 and 1 share the color-1 neighbor 2
    CG = ColoredGraph.from_colored_edges(3, 1, [(0, 2, 1), (1, 2, 1)])
    W, U = VertexSet(3, [0, 1]), VertexSet(3, [2])
    assert build_auxiliary_graph_Hi(CG, W, U, 1, 1).edges() == [(0, 1)]
    assert build_auxiliary_graph_Hi(CG, W, U, 1, 2).num_edges == 0


def test_aux_rejects_overlap():
    CG = mono_clique(4)
    with pytest.raises(ValueError):
        build_auxiliary_graph_Hi(CG, VertexSet(4, [0, 1]), VertexSet(4, [1, 2]), 1, 1)


def test_lift_triangle_to_hexagon():
    a, b, c, uab, ubc, uca = range(6)
    CG = ColoredGraph.from_colored_edges(
        6, 1, [(a, uab, 1), (b, uab, 1), (b, ubc, 1), (c, ubc, 1), (c, uca, 1), (a, uca, 1)]
    )
    out = lift_auxiliary_cycles(CG, {1: [Cycle((a, b, c), 1)]}, VertexSet(6, [uab, ubc, uca]))
    assert [cy.vertices for cy in out] == [(a, uab, b, ubc, c, uca)]
    assert is_valid_mono_cycle(CG, out[0])


def test_lift_digon_to_four_cycle():
    CG = ColoredGraph.from_colored_edges(4, 1, [(0, 2, 1), (1, 2, 1), (0, 3, 1), (1, 3, 1)])
    out = lift_auxiliary_cycles(CG, {1: [Cycle((0, 1), 1)]}, VertexSet(4, [2, 3]))
    assert len(out) == 1 and sorted(out[0].vertices) == [0, 1, 2, 3]
    assert is_valid_mono_cycle(CG, out[0])


def test_lift_shared_single_neighbor_fails_with_witness():
    CG = ColoredGraph.from_colored_edges(3, 1, [(0, 2, 1), (1, 2, 1)])
    with pytest.raises(HallViolation) as ei:
        lift_auxiliary_cycles(CG, {1: [Cycle((0, 1), 1)]}, VertexSet(3, [2]))
    assert len(ei.value.witness) == 2 and ei.value.neighborhood == [2]


def test_approx_empty_w():
    CG = mono_clique(5)
    cov = approx_cover_small_set(CG, VertexSet(5), ApproxParams(r=1))
    assert cov.cycles == []


def test_approx_monochromatic_k50():
    CG = mono_clique(50)
    W = VertexSet(50, range(10))
    cov = approx_cover_small_set(CG, W, ApproxParams(r=1, p=1.0))
    rep = verify_cover(CG, cov, require_disjoint=True)
    assert len(cov.cycles) == 1 and rep.valid and rep.uncovered_count == 0


def test_approx_rejects_wrong_r():
    with pytest.raises(ValueError):
        approx_cover_small_set(mono_clique(4), VertexSet(4, [0]), ApproxParams(r=2))


def test_edge_density():
    assert edge_density(mono_clique(6).base) == 1.0


@settings(max_examples=15, deadline=None)
@given(st.integers(40, 120), st.sampled_from([0.2, 0.4, 0.7]), st.integers(1, 3), st.integers(0, 10_000))
def test_approx_output_is_valid_and_within_budget(n, p, r, seed):
    CG = color_uniform(sample_gnp(GnpParams(n, p, seed)), r, seed)
    W = VertexSet(n, range(n // 4))
    cov = approx_cover_small_set(CG, W, ApproxParams(r=r, hole_c=1.0, aux_threshold=1))
    rep = verify_cover(CG, cov, require_disjoint=True)
    assert rep.valid
    assert len(cov.cycles) <= 3 * r * r
    for c in cov.cycles:
        # lifted cycles alternate between W and its complement
        vs = c.vertices
        assert len(vs) >= 6 and len(vs) % 2 == 0
        assert all((vs[j] in W) != (vs[j + 1] in W) for j in range(len(vs) - 1))
