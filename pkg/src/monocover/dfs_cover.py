"""Long cycles in graphs without large multipartite holes.

A graph whose complement has no ``K_k^m`` (no k pairwise non-adjacent m-sets)
has at most k-1 vertex-disjoint cycles covering all but a bounded number of
vertices. This module builds them constructively:

1. a depth-first search that stops once m vertices are discarded, leaving a
   path plus an unexplored set with no edges back to the discarded ones;
2. cycles carved out of a Hamiltonian path by looking for chords between
   the path's first m vertices and later vertices;
3. an induction that produces up to C(k, 2) cycles, then a merging loop that
   glues pairs of cycles through two disjoint cross edges until k-1 remain.

Internally everything runs on adjacency bitsets restricted to a vertex mask,
so the same code serves whole graphs and induced subgraphs. Ties are always
broken toward the lowest vertex id.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph_core import Cover, Cycle, Graph, VertexSet, iter_bits, lowest

__all__ = [
    "DfsState",
    "HoleParams",
    "TwoEdges",
    "dfs_decompose",
    "cover_from_hamiltonian_path",
    "find_two_disjoint_edges",
    "gendfs_cover",
    "uncovered_bound",
]


@dataclass
class DfsState:
    D: VertexSet
    P: tuple[int, ...]
    U: VertexSet


@dataclass(frozen=True)
class HoleParams:
    k: int
    m: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        if self.m < 1:
            raise ValueError(f"m must be at least 1, got {self.m}")


@dataclass
class TwoEdges:
    i: int
    j: int
    e1: tuple[int, int]  # (endpoint in sets[i], endpoint in sets[j])
    e2: tuple[int, int]


def uncovered_bound(hp: HoleParams) -> int:
    return 2 * hp.k**2 * hp.m + hp.k**3


def _fmt(bits: int) -> str:
    return "{" + ",".join(map(str, iter_bits(bits))) + "}"


def _dfs(adj, sub: int, m: int, trace: list[str] | None = None) -> tuple[int, list[int], int]:
    D = 0
    P: list[int] = []
    U = sub
    ndisc = 0
    step = 0
    while ndisc < m:
        if not P:
            if not U:
                break  # Terminate; unreachable while |sub| >= m
            w = lowest(U)
            P.append(w)
            U &= ~(1 << w)
            rule = "restart"
        else:
            nb = adj[P[-1]] & U
            if nb:
                w = lowest(nb)
                P.append(w)
                U &= ~(1 << w)
                rule = "explore"
            else:
                D |= 1 << P.pop()
                ndisc += 1
                rule = "backtrack"
        step += 1
        if trace is not None:
            trace.append(f"{step} {rule} D={_fmt(D)} P=({','.join(map(str, P))}) U={_fmt(U)}")
    return D, P, U


def dfs_decompose(G: Graph, m: int, trace: list[str] | None = None, within: VertexSet | None = None) -> DfsState:
    """Run DFS until exactly m vertices are discarded.

    The returned state has |D| = m, no edges between D and U, and D, V(P), U
    partition the vertex set. Pass a list as ``trace`` to collect one line per
    automaton step.
    """
    sub = (1 << G.n) - 1 if within is None else within.bits
    if m < 0:
        raise ValueError("m must be non-negative")
    if sub.bit_count() < m:
        raise ValueError(f"graph has {sub.bit_count()} vertices, fewer than m={m}")
    D, P, U = _dfs(G.adjacency_masks(), sub, m, trace)
    return DfsState(VertexSet.from_bits(G.n, D), tuple(P), VertexSet.from_bits(G.n, U))


# ---------------------------------------------------------------------------
# cycles from a Hamiltonian path


def _ham_cycles(adj, seq: list[int], k: int, m: int) -> list[list[int]]:
    """Cycles (vertex lists, length >= 3) carved from the path ``seq``."""
    out: list[list[int]] = []
    while k >= 2:
        n = len(seq)
        if n <= k * m:
            break
        if k == 2:
            tail = 0
            for v in seq[n - m :]:
                tail |= 1 << v
            pos = {v: t for t, v in enumerate(seq)}
            for a in range(m):
                hit = adj[seq[a]] & tail
                if hit:
                    b = max(pos[x] for x in iter_bits(hit))
                    out.append(seq[a : b + 1])
                    break
            break
        head = 0
        for v in seq[:m]:
            head |= 1 << v
        # seq[m] is adjacent to seq[m-1], so some index qualifies
        i = max(t for t in range(m, n) if adj[seq[t]] & head)
        a = min(t for t in range(m) if (adj[seq[i]] >> seq[t]) & 1)
        if i - a + 1 >= 3:
            out.append(seq[a : i + 1])
        seq = seq[i + 1 :]
        k -= 1
    return out


def _check_path(G: Graph, path, sub: int) -> list[int]:
    seq = [int(v) for v in path]
    if len(set(seq)) != len(seq):
        raise ValueError("path repeats a vertex")
    bits = 0
    for v in seq:
        if not 0 <= v < G.n:
            raise ValueError(f"path vertex {v} out of range")
        bits |= 1 << v
    if bits != sub:
        raise ValueError("path does not visit every vertex exactly once")
    for a, b in zip(seq, seq[1:]):
        if not G.has_edge(a, b):
            raise ValueError(f"path uses non-edge {{{a}, {b}}}")
    return seq


def cover_from_hamiltonian_path(
    G: Graph, path, hp: HoleParams, within: VertexSet | None = None, color: int = 1
) -> list[Cycle]:
    """At most k-1 disjoint cycles covering all but km vertices of a Hamiltonian graph.

    The guarantee needs the complement of G to be K_k^m-free; without it the
    output is still a set of valid disjoint cycles, just possibly fewer.
    """
    sub = (1 << G.n) - 1 if within is None else within.bits
    seq = _check_path(G, path, sub)
    return [Cycle(tuple(c), color) for c in _ham_cycles(G.adjacency_masks(), seq, hp.k, hp.m)]


# ---------------------------------------------------------------------------
# merging


def _two_edges(adj, sets: list[int], m: int) -> TwoEdges | None:
    cur = list(sets)
    k = len(cur)
    found: dict[tuple[int, int], list[tuple[int, int]]] = {}
    while all(c.bit_count() >= m for c in cur):
        edge = None
        for i in range(k):
            for a in iter_bits(cur[i]):
                nb = adj[a]
                for j in range(i + 1, k):
                    hit = nb & cur[j]
                    if hit:
                        edge = (i, j, a, lowest(hit))
                        break
                if edge:
                    break
            if edge:
                break
        if edge is None:
            return None
        i, j, a, b = edge
        bucket = found.setdefault((i, j), [])
        bucket.append((a, b))
        if len(bucket) == 2:
            return TwoEdges(i, j, bucket[0], bucket[1])
        cur[i] &= ~(1 << a)
        cur[j] &= ~(1 << b)
    return None


def find_two_disjoint_edges(G: Graph, sets, hp: HoleParams) -> TwoEdges | None:
    """Two vertex-disjoint edges between some pair of the given sets.

    Repeatedly removes the endpoints of a cross edge; once some set has lost
    k vertices, two of its removed edges must share the other side. Returns
    None if no cross edge is left while every set still has m vertices.
    """
    masks = [s.bits if isinstance(s, VertexSet) else VertexSet(G.n, s).bits for s in sets]
    if len(masks) != hp.k:
        raise ValueError(f"expected {hp.k} sets, got {len(masks)}")
    seen = 0
    for t, s in enumerate(masks):
        if s.bit_count() < hp.m + hp.k - 1:
            raise ValueError(f"set {t} has {s.bit_count()} vertices, need at least m+k-1={hp.m + hp.k - 1}")
        if s & seen:
            raise ValueError(f"set {t} overlaps an earlier set")
        seen |= s
    return _two_edges(G.adjacency_masks(), masks, hp.m)


def _segment(c: list[int], length: int) -> tuple[int, dict[int, int]]:
    s0 = c.index(min(c))
    offs = {c[(s0 + t) % len(c)]: t for t in range(length)}
    mask = 0
    for v in offs:
        mask |= 1 << v
    return mask, offs


def _long_arc(c: list[int], offs: dict[int, int], x: int, y: int) -> list[int]:
    """Walk c from x to y the long way round, skipping the segment between them."""
    L = len(c)
    px = c.index(x)
    step = -1 if offs[x] < offs[y] else 1
    out = [x]
    p = px
    while out[-1] != y:
        p = (p + step) % L
        out.append(c[p])
    return out


def _merge_loop(adj, cycles: list[list[int]], k: int, m: int, diag: dict) -> list[list[int]]:
    seg_len = m + k - 1
    cycles = [list(c) for c in cycles]
    while len(cycles) > k - 1:
        shortest = min(range(len(cycles)), key=lambda t: (len(cycles[t]), t))
        if len(cycles[shortest]) < seg_len:
            cycles.pop(shortest)
            diag["dropped"] += 1
            continue
        segs = [_segment(c, seg_len) for c in cycles[:k]]
        res = _two_edges(adj, [s[0] for s in segs], m)
        if res is None:
            cycles.pop(shortest)
            diag["dropped"] += 1
            diag["merge_failures"] += 1
            continue
        i, j = res.i, res.j
        (a1, b1), (a2, b2) = res.e1, res.e2
        arc_i = _long_arc(cycles[i], segs[i][1], a1, a2)
        arc_j = _long_arc(cycles[j], segs[j][1], b2, b1)
        cycles[i] = arc_i + arc_j
        cycles.pop(j)
        diag["merges"] += 1
    return cycles


def _square(adj, sub: int, k: int, m: int) -> list[list[int]]:
    if sub.bit_count() < m:
        return []
    D, P, U = _dfs(adj, sub, m)
    out = _ham_cycles(adj, P, k, m)
    if k > 2 and U:
        out += _square(adj, U, k - 1, m)
    return out


def _absorb(adj, cycles: list[list[int]], leftover: int) -> int:
    """Splice leftover vertices into cycles between two consecutive neighbors.

    Returns the number of vertices absorbed. Cycle count and disjointness are
    unchanged, so every guarantee of the construction still holds.
    """
    absorbed = 0
    changed = True
    while changed and leftover:
        changed = False
        for x in list(iter_bits(leftover)):
            ax = adj[x]
            for c in cycles:
                cmask = 0
                for v in c:
                    cmask |= 1 << v
                if (ax & cmask).bit_count() < 2:
                    continue
                L = len(c)
                j = next((j for j in range(L) if (ax >> c[j]) & 1 and (ax >> c[(j + 1) % L]) & 1), -1)
                if j >= 0:
                    c.insert(j + 1, x)
                    leftover &= ~(1 << x)
                    absorbed += 1
                    changed = True
                    break
    return absorbed


def gendfs_cover(
    G: Graph, hp: HoleParams, within: VertexSet | None = None, color: int = 1, absorb: bool = True
) -> Cover:
    """At most k-1 vertex-disjoint cycles covering most of G (or of G[within]).

    If the complement is K_k^m-free, at most 2k^2 m + k^3 vertices stay
    uncovered. With ``absorb`` set, leftover vertices are finally spliced into
    cycles wherever two consecutive cycle vertices are both adjacent to them.
    Cycles carry ``color`` so they validate against a one-color view of G.
    """
    n = G.n
    sub = (1 << n) - 1 if within is None else within.bits
    adj = G.adjacency_masks() if within is None else [a & sub for a in G.adjacency_masks()]
    diag = {"dropped": 0, "merges": 0, "merge_failures": 0}
    raw = _square(adj, sub, hp.k, hp.m)
    diag["initial_cycles"] = len(raw)
    final = _merge_loop(adj, raw, hp.k, hp.m, diag)
    if absorb:
        used = 0
        for c in final:
            for v in c:
                used |= 1 << v
        diag["absorbed"] = _absorb(adj, final, sub & ~used)
    return Cover([Cycle(tuple(c), color) for c in final], VertexSet.from_bits(n, sub), disjoint=True, diagnostics=diag)


def gendfs_cycles_masks(adj: list[int], n: int, k: int, m: int) -> list[list[int]]:
    """Bitset-level entry point used by exhaustive sweeps (no wrappers)."""
    diag = {"dropped": 0, "merges": 0, "merge_failures": 0}
    return _merge_loop(adj, _square(adj, (1 << n) - 1, k, m), k, m, diag)
