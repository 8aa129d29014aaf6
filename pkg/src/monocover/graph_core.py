"""Simple graphs, edge-colored graphs, and monochromatic cycle covers.

Vertex sets are Python integers used as bitsets (bit ``v`` set means vertex
``v`` is a member), so intersections and popcounts run at machine-word speed
even for tens of thousands of vertices. Graphs are immutable once built;
per-vertex adjacency bitsets are materialized lazily and cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "VertexSet",
    "Graph",
    "ColoredGraph",
    "Cycle",
    "Cover",
    "CoverReport",
    "EdgeListParseError",
    "neighborhood",
    "common_neighborhood",
    "edge_count_between",
    "is_valid_mono_cycle",
    "verify_cover",
    "format_edge_list",
    "parse_edge_list",
    "iter_bits",
    "mask_of",
]

_SMALL = 1024


# ---------------------------------------------------------------------------
# bitset helpers


def iter_bits(x: int, n: int | None = None) -> Iterator[int]:
    """Yield the indices of set bits of ``x`` in increasing order."""
    if x == 0:
        return
    if n is not None and n > _SMALL and x.bit_count() > 64:
        nbytes = (n + 7) // 8
        arr = np.unpackbits(np.frombuffer(x.to_bytes(nbytes, "little"), dtype=np.uint8), bitorder="little")
        yield from np.flatnonzero(arr).tolist()
        return
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def mask_of(vertices: Iterable[int], n: int | None = None) -> int:
    if isinstance(vertices, np.ndarray) and n is not None and len(vertices) > 64:
        buf = np.zeros(((n + 7) // 8) * 8, dtype=bool)
        buf[vertices] = True
        return int.from_bytes(np.packbits(buf, bitorder="little").tobytes(), "little")
    out = 0
    for v in vertices:
        out |= 1 << int(v)
    return out


def lowest(x: int) -> int:
    return (x & -x).bit_length() - 1


class VertexSet:
    """An immutable subset of ``{0, ..., n-1}``."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, members: Iterable[int] = ()):
        bits = mask_of(members, n)
        if bits >> n:
            raise ValueError(f"vertex set member out of range for n={n}")
        self.n = n
        self.bits = bits

    @classmethod
    def from_bits(cls, n: int, bits: int) -> VertexSet:
        if bits < 0 or bits >> n:
            raise ValueError(f"bitset out of range for n={n}")
        obj = cls.__new__(cls)
        obj.n = n
        obj.bits = bits
        return obj

    @classmethod
    def full(cls, n: int) -> VertexSet:
        return cls.from_bits(n, (1 << n) - 1)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits, self.n)

    def __contains__(self, v: object) -> bool:
        return isinstance(v, (int, np.integer)) and 0 <= v < self.n and bool((self.bits >> int(v)) & 1)

    def __bool__(self) -> bool:
        return self.bits != 0

    def _other(self, other: VertexSet) -> int:
        if not isinstance(other, VertexSet):
            return NotImplemented
        if other.n != self.n:
            raise ValueError(f"vertex sets over different ground sets ({self.n} vs {other.n})")
        return other.bits

    def __and__(self, other: VertexSet) -> VertexSet:
        return VertexSet.from_bits(self.n, self.bits & self._other(other))

    def __or__(self, other: VertexSet) -> VertexSet:
        return VertexSet.from_bits(self.n, self.bits | self._other(other))

    def __sub__(self, other: VertexSet) -> VertexSet:
        return VertexSet.from_bits(self.n, self.bits & ~self._other(other))

    def __xor__(self, other: VertexSet) -> VertexSet:
        return VertexSet.from_bits(self.n, self.bits ^ self._other(other))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VertexSet) and other.n == self.n and other.bits == self.bits

    def __hash__(self) -> int:
        return hash((self.n, self.bits))

    def __le__(self, other: VertexSet) -> bool:
        return self.bits & ~self._other(other) == 0

    def isdisjoint(self, other: VertexSet) -> bool:
        return self.bits & self._other(other) == 0

    def complement(self) -> VertexSet:
        return VertexSet.from_bits(self.n, ((1 << self.n) - 1) & ~self.bits)

    def min(self) -> int:
        if not self.bits:
            raise ValueError("min() of empty vertex set")
        return lowest(self.bits)

    def to_list(self) -> list[int]:
        return list(iter_bits(self.bits, self.n))

    def __repr__(self) -> str:
        items = self.to_list()
        shown = ", ".join(map(str, items[:12])) + (", ..." if len(items) > 12 else "")
        return f"VertexSet(n={self.n}, {{{shown}}})"


# ---------------------------------------------------------------------------
# graphs


def _canonical_edges(n: int, edges) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(edges if len(edges) else np.empty((0, 2)), dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise ValueError(f"edge endpoint out of range for n={n}")
    u = np.minimum(arr[:, 0], arr[:, 1])
    v = np.maximum(arr[:, 0], arr[:, 1])
    if np.any(u == v):
        bad = int(u[np.argmax(u == v)])
        raise ValueError(f"self-loop at vertex {bad}")
    key = u * n + v
    order = np.argsort(key, kind="stable")
    key = key[order]
    if key.size > 1 and np.any(key[1:] == key[:-1]):
        i = int(np.argmax(key[1:] == key[:-1]))
        raise ValueError(f"duplicate edge {{{int(key[i] // n)}, {int(key[i] % n)}}}")
    return u[order], v[order]


class Graph:
    """A simple undirected graph on vertices ``0..n-1``.

    Edges are kept as two sorted parallel arrays ``(u, v)`` with ``u < v``;
    this order is the canonical edge order that colorings are aligned with.
    """

    def __init__(self, n: int, edges: Sequence[tuple[int, int]] | np.ndarray = ()):
        if n < 0:
            raise ValueError("n must be non-negative")
        u, v = _canonical_edges(n, edges)
        self._init(n, u, v)

    def _init(self, n: int, u: np.ndarray, v: np.ndarray) -> None:
        self.n = n
        self._u = u
        self._v = v
        self._indptr: np.ndarray | None = None
        self._indices: np.ndarray | None = None
        self._eid: np.ndarray | None = None
        self._adj: list[int | None] = [None] * n

    @classmethod
    def _from_canonical(cls, n: int, u: np.ndarray, v: np.ndarray) -> Graph:
        obj = cls.__new__(cls)
        obj._init(n, np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64))
        return obj

    @classmethod
    def from_masks(cls, n: int, adj: Sequence[int]) -> Graph:
        """Build from symmetric adjacency bitsets (fast path for tiny graphs)."""
        us, vs = [], []
        for a in range(n):
            rest = adj[a] >> (a + 1)
            while rest:
                low = rest & -rest
                us.append(a)
                vs.append(a + low.bit_length())
                rest ^= low
        g = cls._from_canonical(n, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64))
        g._adj = list(adj)
        return g

    @property
    def num_edges(self) -> int:
        return int(self._u.size)

    def edge_array(self) -> tuple[np.ndarray, np.ndarray]:
        return self._u, self._v

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self._u.tolist(), self._v.tolist()))

    def _build_csr(self) -> None:
        n, m = self.n, self._u.size
        # reversed copies first: with canonical (u, v) order, a stable sort on
        # the row alone leaves every row's columns ascending
        rows = np.concatenate([self._v, self._u]).astype(np.int32)
        cols = np.concatenate([self._u, self._v]).astype(np.int32)
        ids = np.arange(m, dtype=np.int32)
        eid = np.concatenate([ids, ids])
        order = np.argsort(rows, kind="stable")
        self._indices = cols[order]
        self._eid = eid[order]
        counts = np.bincount(rows, minlength=n)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of ``v``."""
        if self._indptr is None:
            self._build_csr()
        return self._indices[self._indptr[v] : self._indptr[v + 1]]

    def _edge_ids(self, v: int) -> np.ndarray:
        if self._indptr is None:
            self._build_csr()
        return self._eid[self._indptr[v] : self._indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.bincount(np.concatenate([self._u, self._v]), minlength=self.n)

    def adj(self, v: int) -> int:
        """Adjacency bitset of ``v``."""
        a = self._adj[v]
        if a is None:
            a = mask_of(self.neighbors(v), self.n)
            self._adj[v] = a
        return a

    def adjacency_masks(self) -> list[int]:
        return [self.adj(v) for v in range(self.n)]

    def has_edge(self, a: int, b: int) -> bool:
        return bool((self.adj(a) >> b) & 1)

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple[Graph, list[int]]:
        """Induced subgraph relabelled to ``0..k-1`` in increasing id order."""
        keep = sorted(set(int(x) for x in vertices))
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[keep] = np.arange(len(keep))
        sel = (pos[self._u] >= 0) & (pos[self._v] >= 0)
        return Graph._from_canonical(len(keep), pos[self._u[sel]], pos[self._v[sel]]), keep

    def complement(self) -> Graph:
        full = (1 << self.n) - 1
        return Graph.from_masks(self.n, [full & ~self.adj(v) & ~(1 << v) for v in range(self.n)])

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.num_edges})"


class ColoredGraph:
    """A graph together with a total edge coloring by colors ``1..r``."""

    def __init__(self, base: Graph, r: int, colors: Sequence[int] | np.ndarray):
        if r < 1:
            raise ValueError("r must be at least 1")
        colors = np.asarray(colors, dtype=np.int16).reshape(-1)
        if colors.size != base.num_edges:
            raise ValueError(f"expected {base.num_edges} colors, got {colors.size}")
        if colors.size and (colors.min() < 1 or colors.max() > r):
            raise ValueError(f"colors must lie in 1..{r}")
        self.base = base
        self.r = r
        self.colors = colors
        self._layers: dict[int, Graph] = {}
        self._color_adj: dict[tuple[int, int], int] = {}

    @classmethod
    def from_colored_edges(cls, n: int, r: int, triples: Iterable[tuple[int, int, int]]) -> ColoredGraph:
        triples = list(triples)
        base = Graph(n, [(a, b) for a, b, _ in triples])
        lookup = {(min(a, b), max(a, b)): c for a, b, c in triples}
        colors = [lookup[e] for e in base.edges()]
        return cls(base, r, colors)

    @property
    def n(self) -> int:
        return self.base.n

    def layer(self, i: int) -> Graph:
        """The spanning subgraph of color-``i`` edges."""
        if not 1 <= i <= self.r:
            raise ValueError(f"color {i} out of range 1..{self.r}")
        g = self._layers.get(i)
        if g is None:
            sel = self.colors == i
            u, v = self.base.edge_array()
            g = Graph._from_canonical(self.n, u[sel], v[sel])
            self._layers[i] = g
        return g

    def adj(self, v: int, color: int | None = None) -> int:
        if color is None:
            return self.base.adj(v)
        if color in self._layers:
            return self._layers[color].adj(v)
        key = (v, color)
        a = self._color_adj.get(key)
        if a is None:
            sel = self.colors[self.base._edge_ids(v)] == color
            a = mask_of(self.base.neighbors(v)[sel], self.n)
            self._color_adj[key] = a
        return a

    def color_of(self, a: int, b: int) -> int:
        """Color of edge ``ab``; 0 when absent."""
        if not self.base.has_edge(a, b):
            return 0
        nb = self.base.neighbors(a)
        j = int(np.searchsorted(nb, b))
        return int(self.colors[self.base._edge_ids(a)[j]])

    def colored_edges(self) -> list[tuple[int, int, int]]:
        u, v = self.base.edge_array()
        return list(zip(u.tolist(), v.tolist(), self.colors.tolist()))

    def layer_sizes(self) -> list[int]:
        return [int(np.count_nonzero(self.colors == i)) for i in range(1, self.r + 1)]

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple[ColoredGraph, list[int]]:
        keep = sorted(set(int(x) for x in vertices))
        pos = {v: k for k, v in enumerate(keep)}
        triples = [(pos[a], pos[b], c) for a, b, c in self.colored_edges() if a in pos and b in pos]
        return ColoredGraph.from_colored_edges(len(keep), self.r, triples), keep

    def __repr__(self) -> str:
        return f"ColoredGraph(n={self.n}, edges={self.base.num_edges}, r={self.r})"


# ---------------------------------------------------------------------------
# cycles and covers

VERTEX, EDGE, PROPER = "vertex", "edge", "proper"


@dataclass(frozen=True)
class Cycle:
    """A monochromatic cycle; one vertex or one edge count as degenerate cycles."""

    vertices: tuple[int, ...]
    color: int | None = None
    kind: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        if self.kind is None:
            k = len(self.vertices)
            object.__setattr__(self, "kind", VERTEX if k == 1 else EDGE if k == 2 else PROPER)

    def __len__(self) -> int:
        return len(self.vertices)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "color": self.color, "vertices": list(self.vertices)}


@dataclass
class Cover:
    cycles: list[Cycle]
    target: VertexSet
    disjoint: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def covered(self) -> VertexSet:
        bits = 0
        for c in self.cycles:
            for v in c.vertices:
                bits |= 1 << v
        return VertexSet.from_bits(self.target.n, bits & self.target.bits)

    @property
    def uncovered(self) -> VertexSet:
        return self.target - self.covered

    def __len__(self) -> int:
        return len(self.cycles)


@dataclass
class CoverReport:
    valid: bool
    covered_count: int
    uncovered_count: int
    violations: list[str]


# ---------------------------------------------------------------------------
# queries


def _check_vertex(G, v: int) -> None:
    if not isinstance(v, (int, np.integer)) or not 0 <= v < G.n:
        raise ValueError(f"vertex {v!r} out of range 0..{G.n - 1}")


def _adj_fn(G, color: int | None):
    if isinstance(G, ColoredGraph):
        if color is not None and not 1 <= color <= G.r:
            raise ValueError(f"color {color} out of range 1..{G.r}")
        return (lambda v: G.adj(v, color))
    if color is not None:
        raise ValueError("color given for an uncolored graph")
    return G.adj


def neighborhood(G: Graph | ColoredGraph, v: int, color: int | None = None, within: VertexSet | None = None) -> VertexSet:
    _check_vertex(G, v)
    bits = _adj_fn(G, color)(v)
    if within is not None:
        bits &= within.bits
    return VertexSet.from_bits(G.n, bits)


def common_neighborhood(
    G: Graph | ColoredGraph, S: VertexSet | Iterable[int], color: int | None = None, within: VertexSet | None = None
) -> VertexSet:
    members = list(S)
    if not members:
        raise ValueError("common neighborhood of an empty set is undefined")
    adj = _adj_fn(G, color)
    bits = (1 << G.n) - 1 if within is None else within.bits
    for v in members:
        _check_vertex(G, v)
        bits &= adj(v)
        if not bits:
            break
    return VertexSet.from_bits(G.n, bits)


def edge_count_between(G: Graph | ColoredGraph, A: VertexSet, B: VertexSet, color: int | None = None) -> int:
    """Number of edges (of the given color) with one end in ``A`` and one in ``B``."""
    if not A.isdisjoint(B):
        raise ValueError("edge_count_between needs disjoint sets")
    adj = _adj_fn(G, color)
    small, big = (A, B) if len(A) <= len(B) else (B, A)
    return sum((adj(v) & big.bits).bit_count() for v in small)


def is_valid_mono_cycle(CG: ColoredGraph, c: Cycle) -> bool:
    try:
        vs = c.vertices
        if any(not 0 <= v < CG.n for v in vs) or len(set(vs)) != len(vs):
            return False
        if c.kind == VERTEX:
            return len(vs) == 1 and (c.color is None or 1 <= c.color <= CG.r)
        if c.color is None or not 1 <= c.color <= CG.r:
            return False
        if c.kind == EDGE:
            return len(vs) == 2 and CG.color_of(vs[0], vs[1]) == c.color
        if c.kind == PROPER:
            if len(vs) < 3:
                return False
            layer = CG.layer(c.color)
            return all(layer.has_edge(vs[j], vs[(j + 1) % len(vs)]) for j in range(len(vs)))
    except (TypeError, AttributeError):
        return False
    return False


def verify_cover(CG: ColoredGraph, cover: Cover, require_disjoint: bool = False, max_violations: int = 20) -> CoverReport:
    """Check every cycle, recompute the uncovered set, and check disjointness if asked.

    ``valid`` is structural: it does not demand that the target be fully
    covered; ``uncovered_count`` reports that separately.
    """
    violations: list[str] = []
    seen = 0
    union = 0
    for j, c in enumerate(cover.cycles):
        if not is_valid_mono_cycle(CG, c):
            violations.append(f"cycle {j} is not a valid monochromatic {c.kind} cycle: {c.vertices[:8]}")
        cbits = mask_of(c.vertices)
        if (require_disjoint or cover.disjoint) and cbits & seen:
            shared = lowest(cbits & seen)
            violations.append(f"cycle {j} shares vertex {shared} with an earlier cycle")
        seen |= cbits
        union |= cbits
    covered = (union & cover.target.bits).bit_count()
    return CoverReport(
        valid=not violations,
        covered_count=covered,
        uncovered_count=len(cover.target) - covered,
        violations=violations[:max_violations],
    )


# ---------------------------------------------------------------------------
# colored edge-list text format


class EdgeListParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def format_edge_list(CG: ColoredGraph) -> str:
    lines = [f"{CG.n} {CG.r}"]
    lines += [f"{a} {b} {c}" for a, b, c in CG.colored_edges()]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> ColoredGraph:
    header = None
    triples: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise EdgeListParseError(lineno, f"non-integer token in {line!r}") from None
        if header is None:
            if len(nums) != 2 or nums[0] < 0 or nums[1] < 1:
                raise EdgeListParseError(lineno, "header must be 'n r' with n >= 0, r >= 1")
            header = (nums[0], nums[1])
            continue
        n, r = header
        if len(nums) != 3:
            raise EdgeListParseError(lineno, "edge line must be 'u v c'")
        a, b, c = nums
        if not 0 <= a < b < n:
            raise EdgeListParseError(lineno, f"need 0 <= u < v < {n}, got {a} {b}")
        if not 1 <= c <= r:
            raise EdgeListParseError(lineno, f"color {c} out of range 1..{r}")
        if (a, b) in seen:
            raise EdgeListParseError(lineno, f"duplicate edge {a} {b}")
        seen.add((a, b))
        triples.append((a, b, c))
    if header is None:
        raise EdgeListParseError(0, "missing header")
    return ColoredGraph.from_colored_edges(header[0], header[1], triples)
