from __future__ import annotations

import itertools
import math

import pytest

from monocover.cascade_cover import (
    CascadeGraph,
    LiftFailure,
    SmallSetParams,
    build_cascade_graph,
    cover_auxiliary_subgraph,
    cover_small_set,
    find_robust_path,
    lift_cycle_via_disjoint_paths,
    longest_back_edge_cycle,
    small_set_budget,
)
from monocover.gnp_gen import GnpParams, color_uniform, sample_gnp
from monocover.graph_core import ColoredGraph, Cycle, VertexSet, is_valid_mono_cycle, verify_cover
from monocover.towers import C1, Cascade, Tower, build_levels, compute_params


def vs(n, xs):
    return VertexSet(n, xs)


def flat_tower(n, color, base, top):
    return Tower(color, base, 1, 1, {0: vs(n, [base]), 1: vs(n, top)}, {1: frozenset()})


def c1(n, v, w, top, color=1):
    return Cascade(color, v, w, flat_tower(n, color, v, top), flat_tower(n, color, w, top), C1)


def gadget():
    CG = ColoredGraph.from_colored_edges(5, 2, [(0, 3, 1), (1, 3, 1)])
    lv = build_levels(5, vs(5, [0, 1, 2]), 1.0)
    cp = compute_params(5, 0.5, 2, 1.0, 2, mu=1, m=1)
    return CG, lv, cp


def test_budget_formula():
    assert small_set_budget(2) == pytest.approx(400 * 16 * math.log(16))


# ---------------------------------------------------------------------------
# auxiliary graph


def test_short_base_gives_empty_graph():
    CG = ColoredGraph.from_colored_edges(6, 2, [])
    lv = build_levels(6, vs(6, [0, 1]), 1.0)
    cp = compute_params(6, 0.5, 2, 1.0, 4, mu=1, m=1)
    assert build_cascade_graph(CG, lv, cp).num_edges == 0


def test_gadget_graph_has_one_edge():
    CG, lv, cp = gadget()
    H = build_cascade_graph(CG, lv, cp, 100)
    assert list(H.edges) == [(0, 1, 1)]
    assert H.payload(1, 0, 1).mode == C1


def test_graph_keeps_first_edge_per_pair_and_color():
    H = CascadeGraph(5, 1, vs(5, [0, 1]))
    assert H.add(c1(5, 0, 1, [3]))
    assert not H.add(c1(5, 0, 1, [4]))
    assert H.payload(0, 1, 1).tower_v.top().to_list() == [3]


# ---------------------------------------------------------------------------
# robust paths


def test_robust_path_through_shared_top():
    CG, lv, cp = gadget()
    H = build_cascade_graph(CG, lv, cp, 100)
    assert find_robust_path(CG, H.payload(0, 1, 1)) == [0, 3, 1]


def test_robust_path_precondition():
    CG, lv, cp = gadget()
    cas = build_cascade_graph(CG, lv, cp, 100).payload(0, 1, 1)
    with pytest.raises(ValueError):
        find_robust_path(CG, cas, Y=vs(5, [3]), c_frac=0.5)
    assert find_robust_path(CG, cas, Y=vs(5, [3])) is None


def test_robust_path_two_levels_avoids_bad_branch():
    # tower levels: base 0 -> {2, 3} -> {4, 5}; 3 is avoided, so its children are bad
    n = 7
    e = [(0, 2, 1), (0, 3, 1), (2, 4, 1), (3, 5, 1), (1, 2, 1), (1, 3, 1)]
    CG = ColoredGraph.from_colored_edges(n, 1, e)
    tw_v = Tower(1, 0, 1, 2, {0: vs(n, [0]), 1: vs(n, [2, 3]), 2: vs(n, [4, 5])}, {1: frozenset(), 2: frozenset()})
    tw_w = Tower(1, 1, 1, 2, {0: vs(n, [1]), 1: vs(n, [2, 3]), 2: vs(n, [4, 5])}, {1: frozenset(), 2: frozenset()})
    cas = Cascade(1, 0, 1, tw_v, tw_w, C1)
    path = find_robust_path(CG, cas, Y=vs(n, [3]))
    assert path is not None and 3 not in path and 5 not in path
    assert path[0] == 0 and path[-1] == 1 and len(path) - 1 <= 2 * 2 + 1


# ---------------------------------------------------------------------------
# covering H[Q]


def clique_h(k, color=1):
    H = CascadeGraph(k, 1, vs(k, range(k)))
    for a, b in itertools.combinations(range(k), 2):
        H.add(c1(k, a, b, [], color))
    return H


@pytest.mark.parametrize("k,expect", [(1, 1), (2, 1), (5, 1), (12, 1)])
def test_cover_clique(k, expect):
    aux = cover_auxiliary_subgraph(clique_h(k), vs(k, range(k)))
    assert len(aux.cycles) == expect
    assert sorted(v for c in aux.cycles for v in c.vertices) == list(range(k))


def test_cover_edgeless():
    H = CascadeGraph(5, 2, vs(5, range(5)))
    aux = cover_auxiliary_subgraph(H, vs(5, range(5)))
    assert len(aux.cycles) == 5 and all(len(c.vertices) == 1 for c in aux.cycles)


def test_cover_q_outside_base():
    H = CascadeGraph(5, 2, vs(5, [0, 1]))
    with pytest.raises(ValueError):
        cover_auxiliary_subgraph(H, vs(5, [3]))


def test_longest_back_edge_cycle_on_cycle_graph():
    n = 6
    adj = [(1 << ((v + 1) % n)) | (1 << ((v - 1) % n)) for v in range(n)]
    assert sorted(longest_back_edge_cycle(adj, (1 << n) - 1)) == list(range(n))


# ---------------------------------------------------------------------------
# lifting


def test_lift_digon_with_disjoint_tops():
    CG = ColoredGraph.from_colored_edges(5, 1, [(0, 3, 1), (1, 3, 1), (0, 4, 1), (1, 4, 1)])
    res = lift_cycle_via_disjoint_paths(CG, (0, 1), [c1(5, 0, 1, [3]), c1(5, 0, 1, [4])])
    assert sorted(res.cycle.vertices) == [0, 1, 3, 4]
    assert is_valid_mono_cycle(CG, res.cycle)
    assert res.interiors() == [[3], [4]]


def test_lift_triangle():
    e = [(0, 3, 1), (1, 3, 1), (1, 4, 1), (2, 4, 1), (0, 5, 1), (2, 5, 1)]
    CG = ColoredGraph.from_colored_edges(6, 1, e)
    pay = [c1(6, 0, 1, [3]), c1(6, 1, 2, [4]), c1(6, 0, 2, [5])]
    res = lift_cycle_via_disjoint_paths(CG, (0, 1, 2), pay)
    assert is_valid_mono_cycle(CG, res.cycle) and len(res.cycle.vertices) <= 3 * 3


def test_lift_backtracks_to_reroute():
    # edge 0-1 could use 3 or 4; edge 1-0 can only use 3, so the first choice must move
    e = [(0, 3, 1), (1, 3, 1), (0, 4, 1), (1, 4, 1)]
    CG = ColoredGraph.from_colored_edges(5, 1, e)
    n = 5
    both = Cascade(1, 0, 1, flat_tower(n, 1, 0, [3, 4]), flat_tower(n, 1, 1, [3, 4]), C1)
    only3 = c1(n, 0, 1, [3])
    res = lift_cycle_via_disjoint_paths(CG, (0, 1), [both, only3])
    assert res.interiors() == [[4], [3]]


def test_lift_failure_names_edge():
    CG = ColoredGraph.from_colored_edges(4, 1, [(0, 3, 1), (1, 3, 1)])
    with pytest.raises(LiftFailure) as ei:
        lift_cycle_via_disjoint_paths(CG, (0, 1), [c1(4, 0, 1, [3]), c1(4, 0, 1, [3])])
    assert ei.value.edge_index == 1


def test_lift_argument_errors():
    CG = ColoredGraph.from_colored_edges(4, 2, [(0, 3, 1), (1, 3, 1)])
    with pytest.raises(ValueError):
        lift_cycle_via_disjoint_paths(CG, (0,), [c1(4, 0, 1, [3])])
    with pytest.raises(ValueError):
        lift_cycle_via_disjoint_paths(CG, (0, 1), [c1(4, 0, 1, [3])])
    with pytest.raises(ValueError):
        lift_cycle_via_disjoint_paths(CG, (0, 1), [c1(4, 0, 1, [3]), c1(4, 0, 1, [3], color=2)])
    with pytest.raises(ValueError):
        lift_cycle_via_disjoint_paths(CG, (0, 2), [c1(4, 0, 1, [3]), c1(4, 0, 1, [3])])


# ---------------------------------------------------------------------------
# end to end


def test_small_set_empty():
    CG = ColoredGraph.from_colored_edges(5, 2, [])
    assert cover_small_set(CG, VertexSet(5)).cycles == []


def test_small_set_single_vertex():
    CG = ColoredGraph.from_colored_edges(5, 2, [])
    cov = cover_small_set(CG, vs(5, [2]))
    assert [c.vertices for c in cov.cycles] == [(2,)]


def test_small_set_on_dense_random_graph():
    n = 600
    CG = color_uniform(sample_gnp(GnpParams(n, 0.5, 3)), 2, 3)
    Q = vs(n, range(12))
    cov = cover_small_set(CG, Q, SmallSetParams(eps=0.5, seed=3, mu=2, m=2, sample_budget=200))
    rep = verify_cover(CG, cov, require_disjoint=True)
    assert rep.valid and rep.uncovered_count == 0
    d = cov.diagnostics
    assert d["lift_successes"] >= 1
    for lengths in d["lift_path_edges"]:
        assert max(lengths) <= 2 * 2 + 1
    assert len(cov.cycles) < len(Q)
