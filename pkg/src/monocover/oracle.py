"""Exhaustive ground truth for tiny instances.

Everything here is exponential and guarded by hard size caps; exceeding a cap
raises :class:`OracleSizeError` rather than silently degrading.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .graph_core import ColoredGraph, Cover, Cycle, Graph, VertexSet, iter_bits, lowest

MAX_COVER_N = 12
MAX_FAMILY_T = 12
MAX_FAMILY_V = 20


class OracleSizeError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Hamiltonian-cycle-supporting vertex sets


def cycle_masks(adj: list[int], n: int) -> list[int]:
    """All vertex sets of size >= 3 that span a cycle in the graph given by ``adj``.

    ``reach[S]`` holds the possible end vertices of a path that starts at
    min(S) and visits exactly S; S spans a cycle iff some end closes back.
    """
    size = 1 << n
    reach = [0] * size
    for v in range(n):
        reach[1 << v] = 1 << v
    out = []
    for S in range(1, size):
        ends = reach[S]
        if not ends:
            continue
        start = lowest(S)
        if S.bit_count() >= 3 and ends & adj[start]:
            out.append(S)
        higher = ~((1 << (start + 1)) - 1)
        x = ends
        while x:
            low = x & -x
            v = low.bit_length() - 1
            x ^= low
            nxt = adj[v] & ~S & higher
            while nxt:
                lb = nxt & -nxt
                nxt ^= lb
                reach[S | lb] |= lb
    return out


def _cycle_order(adj: list[int], S: int) -> list[int]:
    start = lowest(S)
    path = [start]

    def extend(used: int) -> bool:
        if used == S:
            return bool((adj[path[-1]] >> start) & 1)
        cand = adj[path[-1]] & S & ~used
        for u in iter_bits(cand):
            path.append(u)
            if extend(used | (1 << u)):
                return True
            path.pop()
        return False

    if not extend(1 << start):
        raise AssertionError("set does not span a cycle")
    return path


@dataclass
class ExactCover:
    size: int
    cover: Cover


def _pieces(n: int, layers: dict[int, list[int]]) -> list[tuple[int, int]]:
    """(vertex mask, color) for every monochromatic cycle, edge and vertex."""
    out = [(1 << v, 0) for v in range(n)]
    for c in sorted(layers):
        adj = layers[c]
        for a in range(n):
            for b in iter_bits(adj[a] >> (a + 1)):
                out.append(((1 << a) | (1 << (a + 1 + b)), c))
        out += [(S, c) for S in cycle_masks(adj, n)]
    return out


def exact_cover_from_layers(n: int, layers: dict[int, list[int]], disjoint: bool = False) -> list[Cycle]:
    """Minimum monochromatic cycle cover given per-color adjacency bitsets.

    Colors may overlap (a pair can be adjacent in several colors), which is
    what auxiliary graphs with parallel colored edges need.
    """
    if n > MAX_COVER_N:
        raise OracleSizeError(f"exact cover oracle supports n <= {MAX_COVER_N}, got {n}")
    pieces = _pieces(n, layers)
    if not disjoint:
        # a piece contained in another piece is never needed
        best_color: dict[int, int] = {}
        for S, c in pieces:
            best_color.setdefault(S, c)
        maximal: list[int] = []
        for S in sorted(best_color, key=lambda S: -S.bit_count()):
            if not any(S & T == S for T in maximal):
                maximal.append(S)
        pieces = [(S, best_color[S]) for S in maximal]
    by_vertex: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for S, c in pieces:
        for v in iter_bits(S):
            by_vertex[v].append((S, c))

    @lru_cache(maxsize=None)
    def solve(unc: int) -> tuple[int, tuple[tuple[int, int], ...]]:
        if unc == 0:
            return 0, ()
        v = lowest(unc)
        best: tuple[int, tuple] = (n + 1, ())
        for S, c in by_vertex[v]:
            if disjoint and S & ~unc:
                continue
            size, rest = solve(unc & ~S)
            if size + 1 < best[0]:
                best = (size + 1, ((S, c),) + rest)
        return best

    _, chosen = solve((1 << n) - 1)
    solve.cache_clear()
    cycles = []
    for S, c in chosen:
        if S.bit_count() == 1:
            cycles.append(Cycle((lowest(S),)))
        elif S.bit_count() == 2:
            cycles.append(Cycle(tuple(iter_bits(S)), c))
        else:
            cycles.append(Cycle(tuple(_cycle_order(layers[c], S)), c))
    return cycles


def min_mono_cycle_cover_exact(CG: ColoredGraph, disjoint: bool = False) -> ExactCover:
    """Fewest monochromatic cycles (single vertices and edges allowed) covering V.

    Overlapping cycles are allowed unless ``disjoint`` is set, in which case
    the cycles must partition V.
    """
    if CG.n > MAX_COVER_N:
        raise OracleSizeError(f"exact cover oracle supports n <= {MAX_COVER_N}, got {CG.n}")
    layers = {c: CG.layer(c).adjacency_masks() for c in range(1, CG.r + 1)}
    cycles = exact_cover_from_layers(CG.n, layers, disjoint)
    return ExactCover(len(cycles), Cover(cycles, VertexSet.full(CG.n), disjoint=disjoint))


def max_disjoint_cycle_coverage(G: Graph, count: int) -> int:
    """Most vertices coverable by ``count`` vertex-disjoint proper cycles of G."""
    if G.n > MAX_COVER_N:
        raise OracleSizeError(f"cycle coverage oracle supports n <= {MAX_COVER_N}, got {G.n}")
    masks = sorted(cycle_masks(G.adjacency_masks(), G.n), key=lambda S: -S.bit_count())

    def best(c: int, used: int, start: int) -> int:
        if c == 0:
            return 0
        top = 0
        for t in range(start, len(masks)):
            S = masks[t]
            if S & used:
                continue
            top = max(top, S.bit_count() + best(c - 1, used | S, t + 1))
        return top

    return best(count, 0, 0)


# ---------------------------------------------------------------------------
# multipartite holes


def is_complement_Kkm_free(G: Graph, k: int, m: int) -> bool:
    """True iff G has no k disjoint m-sets with no edges between different sets."""
    if k < 1 or m < 1:
        raise ValueError("k and m must be positive")
    n = G.n
    if k * m > n:
        return True
    adj = G.adjacency_masks()

    def pick_part(left: int, avail: int, first_min: int) -> bool:
        # choose the next part; parts ordered by their minimum vertex
        if left == 0:
            return True
        if avail.bit_count() < left * m:
            return False
        for v in iter_bits(avail):
            if v < first_min:
                continue
            if grow(left, avail, v, 1 << v, v):
                return True
        return False

    def grow(left: int, avail: int, head: int, part: int, last: int) -> bool:
        if part.bit_count() == m:
            blocked = part
            for u in iter_bits(part):
                blocked |= adj[u]
            return pick_part(left - 1, avail & ~blocked, head + 1)
        cand = avail & ~part & ~((1 << (last + 1)) - 1)
        if cand.bit_count() < m - part.bit_count():
            return False
        for u in iter_bits(cand):
            if grow(left, avail, head, part | (1 << u), u):
                return True
        return False

    return not pick_part(k, (1 << n) - 1, 0)


# ---------------------------------------------------------------------------
# hypergraph families


@dataclass
class HypergraphFamily:
    """Indexed family of a-uniform hypergraphs on the ground set 0..num_vertices-1."""

    num_vertices: int
    edges: list[list[frozenset[int]]]
    arity: int

    def __post_init__(self):
        self.edges = [[frozenset(e) for e in fam] for fam in self.edges]
        for i, fam in enumerate(self.edges):
            for e in fam:
                if len(e) != self.arity:
                    raise ValueError(f"hyperedge {sorted(e)} of family {i} has size {len(e)}, expected {self.arity}")
                if any(not 0 <= v < self.num_vertices for v in e):
                    raise ValueError(f"hyperedge {sorted(e)} of family {i} leaves the ground set")

    @property
    def t(self) -> int:
        return len(self.edges)

    def masks(self) -> list[list[int]]:
        return [sorted({sum(1 << v for v in e) for e in fam}) for fam in self.edges]


def _hit_within(edges: list[int], budget: int) -> bool:
    """Is there a vertex set of size <= budget meeting every edge mask?"""

    def rec(rest: list[int], budget: int) -> bool:
        if not rest:
            return True
        if budget == 0:
            return False
        # disjoint unhit edges each need their own vertex
        packed = 0
        need = 0
        for e in rest:
            if not e & packed:
                packed |= e
                need += 1
                if need > budget:
                    return False
        e0 = rest[0]
        for v in iter_bits(e0):
            b = 1 << v
            if rec([e for e in rest if not e & b], budget - 1):
                return True
        return False

    return rec(list(edges), budget)


def transversal_number(edge_masks: list[int]) -> int:
    edges = sorted(set(edge_masks))
    tau = 0
    while not _hit_within(edges, tau):
        tau += 1
    return tau


def haxell_condition_check(fam: HypergraphFamily, arity: int | None = None) -> bool:
    """tau(union of E_i over I') > (2a-1)(|I'|-1) for every nonempty index set I'."""
    a = fam.arity if arity is None else arity
    if fam.t > MAX_FAMILY_T or fam.num_vertices > MAX_FAMILY_V:
        raise OracleSizeError(
            f"condition check supports t <= {MAX_FAMILY_T}, |V| <= {MAX_FAMILY_V}; got t={fam.t}, |V|={fam.num_vertices}"
        )
    masks = fam.masks()
    for size in range(1, fam.t + 1):
        threshold = (2 * a - 1) * (size - 1)
        for sub in combinations(range(fam.t), size):
            union = sorted({e for i in sub for e in masks[i]})
            # condition fails iff some hitting set has size <= threshold
            if _hit_within(union, threshold):
                return False
    return True


def find_disjoint_hyperedge_system(fam: HypergraphFamily, budget: int = 10**6) -> list[frozenset[int]] | None:
    """One hyperedge per family, pairwise disjoint, by backtracking.

    Returns None when the search space is exhausted (a proof of nonexistence)
    and raises :class:`BudgetExhausted` when the node budget runs out first.
    """
    masks = fam.masks()
    t = fam.t
    choice: list[int] = [0] * t
    nodes = 0

    def rec(done: int, used: int) -> bool:
        nonlocal nodes
        if done == (1 << t) - 1:
            return True
        nodes += 1
        if nodes > budget:
            raise BudgetExhausted(f"disjoint system search exceeded {budget} nodes")
        # most constrained family first
        best_i, best_opts = -1, None
        for i in range(t):
            if (done >> i) & 1:
                continue
            opts = [e for e in masks[i] if not e & used]
            if best_opts is None or len(opts) < len(best_opts):
                best_i, best_opts = i, opts
                if not opts:
                    return False
        for e in best_opts:
            choice[best_i] = e
            if rec(done | (1 << best_i), used | e):
                return True
        return False

    if not rec(0, 0):
        return None
    return [frozenset(iter_bits(e)) for e in choice]
