"""Cover a small residual set Q by few monochromatic cycles.

Vertices of Q are joined in an auxiliary graph H (one edge per color-i
cascade), H[Q] is covered by monochromatic cycles, and each auxiliary cycle is
lifted into G by replacing every auxiliary edge with a short color-i path
through the cascade's levels, all interiors pairwise disjoint.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations

from .graph_core import ColoredGraph, Cover, Cycle, VertexSet, iter_bits, lowest
from .oracle import exact_cover_from_layers
from .rng import PIPELINE, make_rng
from .towers import (
    C1,
    C2,
    Cascade,
    CascadeParams,
    InfeasibleLevel,
    LevelPartition,
    TowerFamily,
    build_levels,
    cascade_between,
    check_tower,
    compute_params,
    level_overlap_stats,
    make_cascade,
    towers_or_cascade,
)

EXACT_AUX_LIMIT = 10


def small_set_budget(r: int) -> float:
    """400 r^4 ln(4 r^2): cycle budget for covering the auxiliary graph on Q."""
    return 400.0 * r**4 * math.log(4 * r * r)


# ---------------------------------------------------------------------------
# auxiliary cascade graph


@dataclass
class CascadeGraph:
    n: int
    r: int
    base: VertexSet  # L_0
    edges: dict[tuple[int, int, int], Cascade] = field(default_factory=dict)  # (v, w, color), v < w
    families: list[TowerFamily] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def payload(self, a: int, b: int, color: int) -> Cascade:
        return self.edges[(min(a, b), max(a, b), color)]

    def has_edge(self, a: int, b: int, color: int) -> bool:
        return (min(a, b), max(a, b), color) in self.edges

    def layer_masks(
        self, vertices: list[int], skip_vacuous: bool = False, exclude: set | None = None
    ) -> dict[int, list[int]]:
        """Per-color adjacency bitsets of H restricted to ``vertices`` (local ids)."""
        local = {v: j for j, v in enumerate(vertices)}
        layers = {c: [0] * len(vertices) for c in range(1, self.r + 1)}
        for key, cas in self.edges.items():
            v, w, c = key
            if (skip_vacuous and cas.vacuous) or (exclude and key in exclude):
                continue
            if v in local and w in local:
                a, b = local[v], local[w]
                layers[c][a] |= 1 << b
                layers[c][b] |= 1 << a
        return layers

    def add(self, cascade: Cascade) -> bool:
        key = (cascade.v, cascade.w, cascade.color)
        if key in self.edges:
            return False  # one edge per (pair, color)
        self.edges[key] = cascade
        return True


def _draw_xhats(L0: list[int], Q: list[int] | None, size: int, budget: int, seed: int) -> tuple[list[tuple[int, ...]], bool]:
    """Subsets of L_0 to grow towers on, each meeting Q when Q is given.

    Enumerates all candidates when there are at most ``budget`` of them and
    samples ``budget`` distinct ones otherwise; the flag reports sampling.
    """
    if Q is not None and len(Q) >= size:
        pool, fixed = Q, ()
    elif Q is not None:
        pool, fixed = [v for v in L0 if v not in set(Q)], tuple(Q)
    else:
        pool, fixed = L0, ()
    pick = size - len(fixed)
    if len(pool) < pick:
        return [], False
    total = math.comb(len(pool), pick)
    if total <= budget:
        return [tuple(sorted(fixed + c)) for c in combinations(pool, pick)], False
    rng = make_rng(seed, PIPELINE, 11)
    seen: set[tuple[int, ...]] = set()
    out = []
    tries = 0
    while len(out) < budget and tries < 20 * budget:
        tries += 1
        idx = rng.choice(len(pool), size=pick, replace=False)
        X = tuple(sorted(fixed + tuple(pool[int(j)] for j in idx)))
        if X not in seen:
            seen.add(X)
            out.append(X)
    return out, True


def _validate(CG: ColoredGraph, levels: LevelPartition, params: CascadeParams, cascade: Cascade) -> None:
    for tw in (cascade.tower_v, cascade.tower_w):
        chk = check_tower(CG, levels, tw, params)
        if not chk:
            raise AssertionError(f"tower on {tw.base} violates {chk.condition}: {chk.detail}")
    if cascade_between(CG, cascade.tower_v, cascade.tower_w, params) != cascade.mode:
        raise AssertionError(f"cascade {cascade.v}-{cascade.w} no longer satisfies {cascade.mode}")


def build_cascade_graph(
    CG: ColoredGraph,
    levels: LevelPartition,
    params: CascadeParams,
    sample_budget: int = 100,
    Q: VertexSet | None = None,
    seed: int = 0,
    validate: bool = True,
) -> CascadeGraph:
    """Auxiliary graph on L_0 with one color-i edge per discovered i-cascade.

    Towers are grown on (2r-1)-subsets of L_0 (only subsets meeting Q when Q
    is given). Growth either yields a C1 cascade directly or r towers sharing
    a top set; tops of two such families are then compared to find C2
    cascades. Every stored payload is re-checked against G.
    """
    r = params.r
    H = CascadeGraph(CG.n, r, levels.base)
    size = 2 * r - 1
    L0 = levels.base.to_list()
    diag = {
        "samples": 0,
        "sampled": False,
        "infeasible": 0,
        "infeasible_levels": {},
        "families": 0,
        "family_pairs": 0,
        "c1": 0,
        "c2": 0,
        "vacuous_c2": 0,
        "duplicates": 0,
        "towers": 0,
    }
    H.diagnostics = diag
    if r < 2 or len(L0) < size:
        return H
    qlist = None if Q is None else Q.to_list()
    xhats, sampled = _draw_xhats(L0, qlist, size, sample_budget, seed)
    diag["sampled"] = sampled
    all_towers = []
    fail_levels: Counter = Counter()

    def store(c: Cascade | None) -> None:
        if c is None:
            return
        if validate:
            _validate(CG, levels, params, c)
        if H.add(c):
            diag["c1" if c.mode == C1 else "c2"] += 1
            diag["vacuous_c2"] += int(c.vacuous)
        else:
            diag["duplicates"] += 1

    for X in xhats:
        diag["samples"] += 1
        try:
            res = towers_or_cascade(CG, levels, params, X)
        except InfeasibleLevel as exc:
            diag["infeasible"] += 1
            fail_levels[exc.level] += 1
            continue
        all_towers += res.towers
        if res.cascade is not None:
            store(res.cascade)
        else:
            H.families.append(res.family)
    diag["infeasible_levels"] = {str(k): v for k, v in sorted(fail_levels.items())}
    diag["families"] = len(H.families)
    if validate:
        for fam in H.families:
            for tw in fam.towers.values():
                chk = check_tower(CG, levels, tw, params)
                if not chk:
                    raise AssertionError(f"tower on {tw.base} violates {chk.condition}: {chk.detail}")
    for F, G2 in combinations(H.families, 2):
        if set(F.bases) & set(G2.bases):
            continue
        diag["family_pairs"] += 1
        for c in range(1, r + 1):
            store(make_cascade(CG, F.towers[c], G2.towers[c], params))
    diag["towers"] = len(all_towers)
    diag["level_overlap"] = {str(k): v for k, v in level_overlap_stats(all_towers, params.mu).items()}
    return H


# ---------------------------------------------------------------------------
# robust paths


def _as_mask(Y) -> int:
    if Y is None:
        return 0
    if isinstance(Y, VertexSet):
        return Y.bits
    if isinstance(Y, int):
        return Y
    out = 0
    for v in Y:
        out |= 1 << v
    return out


def _good_levels(CG: ColoredGraph, tw, Y: int) -> dict[int, int]:
    """Per level, the top-set vertices still reachable from the base avoiding Y."""
    good = {}
    S = tw.sets[tw.s].bits
    bad = Y & S
    good[tw.s] = S & ~bad
    for k in range(tw.s + 1, tw.f + 1):
        S = tw.sets[k].bits
        reach = 0
        for b in iter_bits(bad):
            reach |= CG.adj(b)
        bad = (reach & S) | (Y & S)
        good[k] = S & ~bad
    return good


def _descend(CG: ColoredGraph, tw, good: dict[int, int], z: int) -> list[int] | None:
    """Color-i path base, ..., z through one good vertex per level."""
    path = [z]
    cur = z
    for k in range(tw.f - 1, tw.s - 1, -1):
        nxt = CG.adj(cur, tw.color) & good[k]
        if not nxt:
            return None
        cur = lowest(nxt)
        path.append(cur)
    if not (CG.adj(cur, tw.color) >> tw.base) & 1:
        return None
    path.append(tw.base)
    path.reverse()
    return path


def _shortcut(walk: list[int]) -> list[int]:
    out: list[int] = []
    pos: dict[int, int] = {}
    for x in walk:
        if x in pos:
            cut = pos[x]
            for y in out[cut + 1 :]:
                del pos[y]
            out = out[: cut + 1]
        else:
            pos[x] = len(out)
            out.append(x)
    return out


def find_robust_path(CG: ColoredGraph, cascade: Cascade, Y=None, c_frac: float | None = None) -> list[int] | None:
    """Color-i path from cascade.v to cascade.w of length <= 2f+1 avoiding Y.

    With ``c_frac`` set, every tower level must meet Y in at most a c_frac
    fraction of its vertices (ValueError otherwise). Returns None when the
    propagated bad sets leave no usable vertex.
    """
    Ym = _as_mask(Y)
    tv, tw = cascade.tower_v, cascade.tower_w
    if c_frac is not None:
        for tower in (tv, tw):
            for k in range(tower.s, tower.f + 1):
                S = tower.sets[k]
                hit = (S.bits & Ym).bit_count()
                if hit > c_frac * len(S):
                    raise ValueError(
                        f"Y meets level {k} of the tower on {tower.base} in {hit} of {len(S)} vertices (> {c_frac})"
                    )
    gv = _good_levels(CG, tv, Ym)
    gw = _good_levels(CG, tw, Ym)
    f = tv.f
    shared = gv[f] & gw[f]
    for z in iter_bits(shared):
        pv, pw = _descend(CG, tv, gv, z), _descend(CG, tw, gw, z)
        if pv is not None and pw is not None:
            return _shortcut(pv + pw[::-1][1:])
    if cascade.mode != C2:
        return None
    top_v, top_w = tv.top().bits, tw.top().bits
    i = cascade.color
    for zv in iter_bits(gv[f] & ~top_w):
        cand = CG.adj(zv, i) & gw[f] & ~top_v
        if not cand:
            continue
        pv = _descend(CG, tv, gv, zv)
        if pv is None:
            continue
        for zw in iter_bits(cand):
            pw = _descend(CG, tw, gw, zw)
            if pw is not None:
                return _shortcut(pv + pw[::-1])
    return None


# ---------------------------------------------------------------------------
# covering the auxiliary graph on Q


@dataclass
class AuxCover:
    cycles: list[Cycle]
    budget: float
    method: str

    @property
    def over_budget(self) -> bool:
        return len(self.cycles) > self.budget


def longest_back_edge_cycle(adj: list[int], live: int, max_starts: int = 64) -> list[int] | None:
    """Longest cycle closed by a back edge over DFS runs from up to ``max_starts`` live vertices."""
    best: list[int] | None = None
    for start_no, s in enumerate(iter_bits(live)):
        if start_no >= max_starts:
            break
        stack = [s]
        pos = {s: 0}
        onstack = 1 << s
        visited = 1 << s
        pending = [adj[s] & live]
        while stack:
            nxt = pending[-1] & ~visited
            if not nxt:
                v = stack.pop()
                pending.pop()
                onstack &= ~(1 << v)
                del pos[v]
                continue
            u = lowest(nxt)
            pending[-1] &= ~(1 << u)
            visited |= 1 << u
            back = adj[u] & onstack
            if back:
                top = min(pos[a] for a in iter_bits(back))
                length = len(stack) - top + 1
                if length >= 3 and (best is None or length > len(best)):
                    best = stack[top:] + [u]
            pos[u] = len(stack)
            stack.append(u)
            onstack |= 1 << u
            pending.append(adj[u] & live)
        if best is not None and len(best) == live.bit_count():
            break
    return best


def cover_auxiliary_subgraph(
    H: CascadeGraph,
    Q: VertexSet,
    budget: float | None = None,
    skip_vacuous: bool = False,
    exclude: set | None = None,
) -> AuxCover:
    """Vertex-disjoint monochromatic cycles of H[Q] covering Q.

    Small Q is solved exactly; larger Q greedily takes the longest cycle found
    in any color, then edges, then single vertices. ``skip_vacuous`` ignores
    C2 edges whose top differences have no edges at all, since no path can
    be routed through them; ``exclude`` drops specific (v, w, color) edges.
    """
    if not Q <= H.base:
        raise ValueError("Q must lie inside the auxiliary graph's vertex set")
    budget = small_set_budget(H.r) if budget is None else budget
    verts = Q.to_list()
    layers = H.layer_masks(verts, skip_vacuous, exclude)
    if len(verts) <= EXACT_AUX_LIMIT:
        local = exact_cover_from_layers(len(verts), layers, disjoint=True)
        cycles = [Cycle(tuple(verts[j] for j in c.vertices), c.color) for c in local]
        return AuxCover(cycles, budget, "exact")
    live = (1 << len(verts)) - 1
    cycles = []
    while True:
        best, best_color = None, 0
        for c in sorted(layers):
            cyc = longest_back_edge_cycle(layers[c], live)
            if cyc is not None and (best is None or len(cyc) > len(best)):
                best, best_color = cyc, c
        if best is None:
            break
        cycles.append(Cycle(tuple(verts[j] for j in best), best_color))
        for j in best:
            live &= ~(1 << j)
    for a in iter_bits(live):
        if not (live >> a) & 1:
            continue
        for c in sorted(layers):
            nb = layers[c][a] & live & ~(1 << a)
            if nb:
                b = lowest(nb)
                cycles.append(Cycle((verts[a], verts[b]), c))
                live &= ~((1 << a) | (1 << b))
                break
    for a in iter_bits(live):
        cycles.append(Cycle((verts[a],)))
    return AuxCover(cycles, budget, "greedy")


# ---------------------------------------------------------------------------
# lifting


class LiftFailure(Exception):
    def __init__(self, edge_index: int, nodes: int, reason: str):
        super().__init__(f"cannot route auxiliary edge {edge_index}: {reason} after {nodes} search nodes")
        self.edge_index = edge_index
        self.nodes = nodes


@dataclass
class LiftResult:
    cycle: Cycle
    paths: list[list[int]]  # one oriented path per auxiliary edge
    nodes: int

    def interiors(self) -> list[list[int]]:
        return [p[1:-1] for p in self.paths]


def lift_cycle_via_disjoint_paths(
    CG: ColoredGraph,
    cycle: tuple[int, ...] | list[int],
    payloads: list[Cascade],
    reserved=None,
    node_budget: int = 10_000,
) -> LiftResult:
    """Replace each auxiliary edge by a short path with pairwise disjoint interiors.

    Paths come from :func:`find_robust_path` with everything already used
    (plus ``reserved``) as the avoided set. When a later edge gets stuck, the
    earlier edge is re-routed around the vertices its previous choice used.
    """
    vs = [int(v) for v in cycle]
    L = len(vs)
    if L < 2:
        raise ValueError("an auxiliary cycle needs at least two vertices")
    if len(payloads) != L:
        raise ValueError(f"expected {L} cascade payloads, got {len(payloads)}")
    colors = {c.color for c in payloads}
    if len(colors) != 1:
        raise ValueError(f"payloads mix colors {sorted(colors)}")
    for j, c in enumerate(payloads):
        a, b = vs[j], vs[(j + 1) % L]
        if {c.v, c.w} != {a, b}:
            raise ValueError(f"payload {j} joins {c.v}-{c.w}, not {a}-{b}")
    base_avoid = _as_mask(reserved)
    for v in vs:
        base_avoid |= 1 << v
    chosen: list[list[int]] = [[] for _ in range(L)]
    nodes = 0
    deepest = 0

    def rec(j: int, used: int) -> bool:
        nonlocal nodes, deepest
        if j == L:
            return True
        deepest = max(deepest, j)
        banned = 0
        while nodes < node_budget:
            nodes += 1
            path = find_robust_path(CG, payloads[j], used | banned)
            if path is None:
                return False
            if path[0] != vs[j]:
                path = path[::-1]
            interior = 0
            for x in path[1:-1]:
                interior |= 1 << x
            chosen[j] = path
            if rec(j + 1, used | interior):
                return True
            if nodes >= node_budget:
                return False
            banned |= interior
        return False

    ok = rec(0, base_avoid)
    if not ok:
        reason = "search budget exhausted" if nodes >= node_budget else "no disjoint path system"
        raise LiftFailure(deepest, nodes, reason)
    seq: list[int] = []
    for path in chosen:
        seq += path[:-1]
    return LiftResult(Cycle(tuple(seq), payloads[0].color), chosen, nodes)


# ---------------------------------------------------------------------------
# end to end


@dataclass
class SmallSetParams:
    eps: float = 0.2
    seed: int = 0
    sample_budget: int = 400
    node_budget: int = 10_000
    p: float | None = None  # None means measured edge density
    mu: int | None = None
    m: int | None = None
    q: int | None = None
    strict: bool = False
    validate: bool = True
    repair_rounds: int = 4  # re-cover failed lifts with the stuck edge removed


def _degenerate(vertices) -> list[Cycle]:
    return [Cycle((v,)) for v in vertices]


def cover_small_set(CG: ColoredGraph, Q: VertexSet, params: SmallSetParams | None = None, W: VertexSet | None = None) -> Cover:
    """Monochromatic cycles covering Q, built from cascades between Q's vertices.

    ``W`` is the base level L_0 (defaults to Q); the levels are carved from
    the remaining vertices. Auxiliary cycles that cannot be lifted fall back
    to single-vertex cycles, so the result always covers Q.
    """
    params = params or SmallSetParams()
    n, r = CG.n, CG.r
    W = Q if W is None else W
    if not Q <= W:
        raise ValueError("Q must be a subset of W")
    diag: dict = {"budget": small_set_budget(r), "fallback_vertices": 0, "lift_attempts": 0, "lift_successes": 0}
    if not Q:
        return Cover([], Q, disjoint=True, diagnostics=diag)
    if len(Q) == 1 or r < 2:
        diag["fallback_vertices"] = len(Q)
        diag["reason"] = "single vertex" if len(Q) == 1 else "r < 2"
        return Cover(_degenerate(Q), Q, disjoint=True, diagnostics=diag)
    p = params.p
    if p is None:
        pairs = n * (n - 1) // 2
        p = CG.base.num_edges / pairs if pairs else 0.0
    try:
        levels = build_levels(n, W, params.eps, params.seed)
        cparams = compute_params(
            n, p, r, params.eps, min(levels.sizes()), params.strict, mu=params.mu, m=params.m, q=params.q
        )
    except ValueError as exc:
        diag["fallback_vertices"] = len(Q)
        diag["reason"] = str(exc)
        return Cover(_degenerate(Q), Q, disjoint=True, diagnostics=diag)
    diag["params"] = cparams.to_dict()
    H = build_cascade_graph(CG, levels, cparams, params.sample_budget, Q=Q, seed=params.seed, validate=params.validate)
    diag["cascade_graph"] = dict(H.diagnostics, edges=H.num_edges)
    cycles: list[Cycle] = []
    reserved = 0
    pending = Q
    excluded: set[tuple[int, int, int]] = set()
    diag["aux_cycles"] = 0
    diag["over_budget"] = False
    diag["repair_rounds"] = 0
    diag["lift_path_edges"] = []  # per lifted cycle: edge count of each routed path
    for round_no in range(params.repair_rounds + 1):
        aux = cover_auxiliary_subgraph(H, pending, skip_vacuous=True, exclude=excluded)
        if round_no == 0:
            diag["aux_method"] = aux.method
            diag["aux_cycles"] = len(aux.cycles)
            diag["over_budget"] = aux.over_budget
        failed: list[int] = []
        for c in aux.cycles:
            if len(c.vertices) == 1:
                failed.append(c.vertices[0])
                continue
            vs = list(c.vertices)
            if len(vs) == 2:
                pay = [H.payload(vs[0], vs[1], c.color)] * 2
            else:
                pay = [H.payload(vs[j], vs[(j + 1) % len(vs)], c.color) for j in range(len(vs))]
            diag["lift_attempts"] += 1
            try:
                res = lift_cycle_via_disjoint_paths(CG, vs, pay, reserved, params.node_budget)
            except LiftFailure as exc:
                a, b = vs[exc.edge_index], vs[(exc.edge_index + 1) % len(vs)]
                excluded.add((min(a, b), max(a, b), c.color))
                failed += vs
                continue
            diag["lift_successes"] += 1
            diag["lift_path_edges"].append([len(path) - 1 for path in res.paths])
            for path in res.paths:
                for x in path[1:-1]:
                    reserved |= 1 << x
            cycles.append(res.cycle)
        pending = VertexSet(n, failed)
        if not pending or len(failed) == len(aux.cycles):
            break  # only single vertices left
        diag["repair_rounds"] = round_no + 1
    cycles += _degenerate(pending)
    diag["fallback_vertices"] = len(pending)
    diag["lift_success_rate"] = diag["lift_successes"] / diag["lift_attempts"] if diag["lift_attempts"] else None
    return Cover(cycles, Q, disjoint=True, diagnostics=diag)
