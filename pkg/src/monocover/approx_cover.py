"""Approximate cover of a vertex set W by few disjoint monochromatic cycles.

Each vertex of W is assigned the color it uses most toward U = V \\ W. Within
a color class, two vertices are joined in an auxiliary graph when they share
many common neighbors in that color inside U. Long cycles of the auxiliary
graph are found with :func:`monocover.dfs_cover.gendfs_cover`, and every
auxiliary edge vw is then replaced by a path v-u-w through a distinct common
neighbor u, chosen by one bipartite matching over all auxiliary edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dfs_cover import HoleParams, gendfs_cover
from .graph_core import ColoredGraph, Cover, Cycle, Graph, VertexSet, iter_bits
from .matching import Matching, hall_violator, hopcroft_karp


@dataclass
class ApproxParams:
    r: int
    hole_c: float | None = None  # default 384 r
    aux_threshold: float | None = None  # default n p^2 / (50 r)^4
    budget_k: int | None = None  # default 3 r
    K_leftover: float | None = None  # default (20 r)^4
    p: float | None = None  # edge probability; None means measured edge density

    def resolved(self, n: int, p: float) -> dict:
        r = self.r
        return {
            "hole_c": 384.0 * r if self.hole_c is None else float(self.hole_c),
            "aux_threshold": n * p * p / (50.0 * r) ** 4 if self.aux_threshold is None else float(self.aux_threshold),
            "budget_k": 3 * r if self.budget_k is None else int(self.budget_k),
            "K_leftover": float((20 * r) ** 4) if self.K_leftover is None else float(self.K_leftover),
            "p": p,
        }


class HallViolation(Exception):
    """The auxiliary edges cannot all be matched to distinct middle vertices."""

    def __init__(self, witness: list[tuple[int, int, int]], neighborhood: list[int], matching: Matching):
        super().__init__(
            f"{len(witness)} auxiliary edges share only {len(neighborhood)} common neighbors (Hall's condition fails)"
        )
        self.witness = witness
        self.neighborhood = neighborhood
        self.matching = matching


def edge_density(G: Graph) -> float:
    pairs = G.n * (G.n - 1) // 2
    return G.num_edges / pairs if pairs else 0.0


def _color_degree_counts(CG: ColoredGraph, W: VertexSet, U: VertexSet) -> np.ndarray:
    counts = np.zeros((len(W), CG.r), dtype=np.int64)
    for row, v in enumerate(W):
        for i in range(1, CG.r + 1):
            counts[row, i - 1] = (CG.adj(v, i) & U.bits).bit_count()
    return counts


def majority_color_partition(CG: ColoredGraph, W: VertexSet) -> list[VertexSet]:
    """Split W by the color each vertex uses most toward V \\ W (ties to the lowest color)."""
    U = W.complement()
    members: list[list[int]] = [[] for _ in range(CG.r)]
    counts = _color_degree_counts(CG, W, U)
    for row, v in enumerate(W):
        members[int(np.argmax(counts[row]))].append(v)  # argmax returns the first maximum
    return [VertexSet(CG.n, ms) for ms in members]


def _rows(masks: list[int], n: int) -> np.ndarray:
    nbytes = (n + 7) // 8
    buf = b"".join(x.to_bytes(nbytes, "little") for x in masks)
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), bitorder="little")
    return bits.reshape(len(masks), nbytes * 8)[:, :n]


def build_auxiliary_graph_Hi(CG: ColoredGraph, W_i: VertexSet, U: VertexSet, i: int, threshold: float) -> Graph:
    """Graph on W_i (original ids) joining v, w when they share >= threshold color-i neighbors in U."""
    if not W_i.isdisjoint(U):
        raise ValueError("W_i and U must be disjoint")
    verts = W_i.to_list()
    if len(verts) < 2:
        return Graph(CG.n)
    nb = [CG.adj(v, i) & U.bits for v in verts]
    A = _rows(nb, CG.n).astype(np.float32)
    common = A @ A.T  # exact for counts below 2^24
    iu, ju = np.triu_indices(len(verts), k=1)
    sel = common[iu, ju] >= threshold
    idx = np.asarray(verts, dtype=np.int64)
    return Graph._from_canonical(CG.n, idx[iu[sel]], idx[ju[sel]])


def _aux_edges(cyc: Cycle) -> list[tuple[int, int]]:
    vs = cyc.vertices
    if len(vs) == 2:
        return [(vs[0], vs[1]), (vs[1], vs[0])]  # digon: two parallel auxiliary edges
    return [(vs[j], vs[(j + 1) % len(vs)]) for j in range(len(vs))]


def _lift_one(vs: tuple[int, ...], middles: list[int], color: int) -> Cycle:
    # middles[j] sits between vs[j] and vs[j+1]; a digon (v, w) becomes (v, u1, w, u2)
    out: list[int] = []
    for v, u in zip(vs, middles):
        out += [v, u]
    return Cycle(tuple(out), color)


def _matching_problem(CG: ColoredGraph, per_color_cycles: dict[int, list[Cycle]], U: VertexSet):
    items: list[tuple[int, int, int, int]] = []  # (color, cycle index, v, w)
    adj: list[list[int]] = []
    flat: list[tuple[int, Cycle]] = []
    for color in sorted(per_color_cycles):
        for cyc in per_color_cycles[color]:
            ci = len(flat)
            flat.append((color, cyc))
            for v, w in _aux_edges(cyc):
                items.append((color, ci, v, w))
                common = CG.adj(v, color) & CG.adj(w, color) & U.bits
                adj.append(list(iter_bits(common, CG.n)))
    return items, adj, flat


def _assemble(items, matching: Matching, flat, keep_partial: bool) -> tuple[list[Cycle], list[int]]:
    middles: dict[int, list[int]] = {}
    ok = [True] * len(flat)
    for t, (color, ci, v, w) in enumerate(items):
        u = matching.left_to_right[t]
        if u < 0:
            ok[ci] = False
        middles.setdefault(ci, []).append(u)
    lifted, failed = [], []
    for ci, (color, cyc) in enumerate(flat):
        if ok[ci]:
            lifted.append(_lift_one(cyc.vertices, middles[ci], color))
        elif keep_partial:
            failed.append(ci)
    return lifted, failed


def lift_auxiliary_cycles(CG: ColoredGraph, per_color_cycles: dict[int, list[Cycle]], U: VertexSet) -> list[Cycle]:
    """Replace each auxiliary edge vw by a path v-u-w through distinct middles u in U.

    Raises :class:`HallViolation` with a witness set of auxiliary edges when
    no matching saturates all of them.
    """
    items, adj, flat = _matching_problem(CG, per_color_cycles, U)
    matching = hopcroft_karp(adj)
    if not matching.saturates_left():
        left, right = hall_violator(adj, matching)
        raise HallViolation([(items[t][0], items[t][2], items[t][3]) for t in left], right, matching)
    lifted, _ = _assemble(items, matching, flat, keep_partial=False)
    return lifted


def approx_cover_small_set(CG: ColoredGraph, W: VertexSet, params: ApproxParams) -> Cover:
    """At most r(3r-1) vertex-disjoint monochromatic cycles covering most of W."""
    n, r = CG.n, CG.r
    if params.r != r:
        raise ValueError(f"params are for r={params.r} but the graph has r={r}")
    p = edge_density(CG.base) if params.p is None else float(params.p)
    cfg = params.resolved(n, p)
    diag: dict = {"params": cfg, "colors": [], "zero_degree": 0}
    if not W:
        return Cover([], W, disjoint=True, diagnostics=diag)
    U = W.complement()
    parts = majority_color_partition(CG, W)
    per_color: dict[int, list[Cycle]] = {}
    dropped = 0
    for i, W_i in enumerate(parts, start=1):
        live = [v for v in W_i if CG.adj(v, i) & U.bits]
        diag["zero_degree"] += len(W_i) - len(live)
        W_live = VertexSet(n, live)
        info = {"color": i, "size": len(W_i), "live": len(live), "aux_edges": 0, "cycles": 0, "m": 0}
        if len(live) >= 1:
            H = build_auxiliary_graph_Hi(CG, W_live, U, i, cfg["aux_threshold"])
            # cap m so the DFS step leaves a path long enough to close a cycle
            m_cap = max(1, (len(live) - 1) // (cfg["budget_k"] + 1))
            m = min(math.ceil(cfg["hole_c"] / p) if p > 0 else m_cap, m_cap)
            aux = gendfs_cover(H, HoleParams(cfg["budget_k"], m), within=W_live, color=i)
            per_color[i] = list(aux.cycles)
            info.update(aux_edges=H.num_edges, cycles=len(aux.cycles), m=m)
        diag["colors"].append(info)
    cap = r * (3 * r - 1)
    flat_count = sum(len(v) for v in per_color.values())
    if flat_count > cap:
        ranked = sorted((-len(c), col, t) for col, cs in per_color.items() for t, c in enumerate(cs))
        keep = {(col, t) for _, col, t in ranked[:cap]}
        per_color = {col: [c for t, c in enumerate(cs) if (col, t) in keep] for col, cs in per_color.items()}
        dropped += flat_count - cap
    items, adj, flat = _matching_problem(CG, per_color, U)
    matching = hopcroft_karp(adj)
    cycles, failed = _assemble(items, matching, flat, keep_partial=True)
    diag["aux_edge_total"] = len(items)
    diag["matching_size"] = matching.size
    diag["lift_failures"] = len(failed)
    diag["capped_cycles"] = dropped
    if failed:
        witness = hall_violator(adj, matching)
        diag["hall_witness_size"] = len(witness[0]) if witness else 0
    cover = Cover(cycles, W, disjoint=True, diagnostics=diag)
    diag["uncovered"] = len(cover.uncovered)
    diag["leftover_bound"] = cfg["K_leftover"] / p if p > 0 else None
    return cover
