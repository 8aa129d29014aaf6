"""Random graph and edge-coloring samplers.

All randomness flows through :func:`monocover.rng.make_rng`, so a given
``(seed, stream)`` pair always reproduces the same graph or coloring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph_core import ColoredGraph, Graph, VertexSet
from .rng import COLORING, GRAPH, make_rng

COLORING_MODES = ("uniform", "bal_debiasio", "from_file")


@dataclass
class GnpParams:
    n: int
    p: float
    seed: int = 0

    def validate(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 <= float(self.p) <= 1.0) or math.isnan(float(self.p)):
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")


@dataclass
class ColoringSpec:
    mode: str = "uniform"
    r: int = 2
    seed: int = 0
    path: str | None = None  # from_file
    retries: int = 8  # bal_debiasio: greedy restarts when searching X
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.mode not in COLORING_MODES:
            raise ValueError(f"unknown coloring mode {self.mode!r}; expected one of {COLORING_MODES}")
        if not isinstance(self.r, int) or self.r < 1:
            raise ValueError(f"r must be a positive integer, got {self.r!r}")
        if self.mode == "from_file" and not self.path:
            raise ValueError("from_file coloring needs a path")
        if self.mode == "bal_debiasio" and self.r < 2:
            raise ValueError("bal_debiasio coloring needs r >= 2")


def _pair_offsets(n: int) -> np.ndarray:
    # index of the first pair (u, u+1) in row-major order over u < v
    u = np.arange(n, dtype=np.int64)
    return u * (2 * n - u - 1) // 2


def pair_index_to_edges(n: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    off = _pair_offsets(n)
    u = np.searchsorted(off, idx, side="right") - 1
    v = idx - off[u] + u + 1
    return u, v


def sample_gnp(params: GnpParams, stream: tuple[int, ...] = (0,)) -> Graph:
    """Sample G(n, p) by geometric skipping over the C(n, 2) pair indices."""
    params.validate()
    n, p = params.n, float(params.p)
    total = n * (n - 1) // 2
    if p == 0.0 or total == 0:
        return Graph._from_canonical(n, np.empty(0, np.int64), np.empty(0, np.int64))
    if p == 1.0:
        idx = np.arange(total, dtype=np.int64)
        return Graph._from_canonical(n, *pair_index_to_edges(n, idx))
    rng = make_rng(params.seed, *stream, GRAPH)
    chunks = []
    pos = -1
    expected = total * p
    batch = int(expected + 6 * math.sqrt(expected * (1 - p)) + 64)
    while True:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps, dtype=np.int64)
        if idx[-1] >= total:
            chunks.append(idx[idx < total])
            break
        chunks.append(idx)
        pos = int(idx[-1])
        batch = max(64, batch // 4)
    idx = np.concatenate(chunks)
    return Graph._from_canonical(n, *pair_index_to_edges(n, idx))


def color_uniform(G: Graph, r: int, seed: int, stream: tuple[int, ...] = (0,)) -> ColoredGraph:
    if r < 1:
        raise ValueError("r must be at least 1")
    rng = make_rng(seed, *stream, COLORING)
    return ColoredGraph(G, r, rng.integers(1, r + 1, size=G.num_edges, dtype=np.int16))


def _greedy_sparse_independent(G: Graph, r: int, order: np.ndarray) -> list[int]:
    cnt = np.zeros(G.n, dtype=np.int64)  # neighbors already in X
    blocked = np.zeros(G.n, dtype=bool)  # in X or adjacent to X
    X = []
    for v in order.tolist():
        if blocked[v]:
            continue
        nb = G.neighbors(v)
        if nb.size and cnt[nb].max() >= r - 1:
            continue
        X.append(v)
        blocked[v] = True
        blocked[nb] = True
        cnt[nb] += 1
    return X


def find_sparse_independent_set(G: Graph, r: int, seed: int = 0, retries: int = 8) -> VertexSet:
    """Greedy independent set X in which every vertex has at most r-1 neighbors.

    Several random vertex orders are tried and the largest result is kept.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    rng = make_rng(seed, COLORING, 1)
    best: list[int] = []
    for _ in range(max(1, retries)):
        X = _greedy_sparse_independent(G, r, rng.permutation(G.n))
        if len(X) > len(best):
            best = X
    return VertexSet(G.n, sorted(best))


def color_adversarial_bal_debiasio(G: Graph, r: int, X: VertexSet) -> ColoredGraph:
    """Color so that no monochromatic component meets X twice.

    Edges avoiding X get color r; each outside vertex colors its edges into X
    with 1, 2, ... in increasing neighbor-id order.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if X.n != G.n:
        raise ValueError("X lives on a different vertex set")
    xb = X.bits
    for v in X:
        if G.adj(v) & xb:
            w = (G.adj(v) & xb & -(G.adj(v) & xb)).bit_length() - 1
            raise ValueError(f"X is not independent: vertex {v} is adjacent to {w} in X")
    inx = np.zeros(G.n, dtype=bool)
    inx[X.to_list()] = True
    deg_x = np.zeros(G.n, dtype=np.int64)
    u, v = G.edge_array()
    np.add.at(deg_x, u[inx[v]], 1)
    np.add.at(deg_x, v[inx[u]], 1)
    bad = np.flatnonzero((deg_x > r - 1) & ~inx)
    if bad.size:
        b = int(bad[0])
        raise ValueError(f"vertex {b} has {int(deg_x[b])} neighbors in X, more than r-1={r - 1}")
    colors = np.full(G.num_edges, r, dtype=np.int16)
    for w in np.flatnonzero(deg_x).tolist():
        nb = G.neighbors(w)
        eids = G._edge_ids(w)
        sel = inx[nb]
        # neighbors come sorted, so ranks follow neighbor-id order
        colors[eids[sel]] = np.arange(1, int(sel.sum()) + 1)
    return ColoredGraph(G, r, colors)


def monochromatic_components(CG: ColoredGraph, color: int) -> list[list[int]]:
    """Connected components of one color layer, isolated vertices excluded."""
    layer = CG.layer(color)
    seen = 0
    comps = []
    for s in range(CG.n):
        if (seen >> s) & 1 or layer.adj(s) == 0:
            continue
        comp = 1 << s
        frontier = 1 << s
        while frontier:
            nxt = 0
            x = frontier
            while x:
                low = x & -x
                nxt |= layer.adj(low.bit_length() - 1)
                x ^= low
            frontier = nxt & ~comp
            comp |= frontier
        seen |= comp
        comps.append(VertexSet.from_bits(CG.n, comp).to_list())
    return comps


def apply_coloring(G: Graph, spec: ColoringSpec, stream: tuple[int, ...] = (0,)) -> tuple[ColoredGraph, dict]:
    """Color G per the spec; returns the colored graph and a small info dict."""
    spec.validate()
    if spec.mode == "uniform":
        return color_uniform(G, spec.r, spec.seed, stream), {}
    if spec.mode == "bal_debiasio":
        X = find_sparse_independent_set(G, spec.r, seed=spec.seed, retries=spec.retries)
        return color_adversarial_bal_debiasio(G, spec.r, X), {"X": X.to_list()}
    raise ValueError("from_file colorings are loaded, not applied to a sampled graph")


def is_sparse_independent(G: Graph, r: int, X: VertexSet) -> bool:
    """Brute re-check: X independent and every vertex has at most r-1 neighbors in X."""
    xb = X.bits
    return all(not (G.adj(v) & xb) for v in X) and all((G.adj(v) & xb).bit_count() <= r - 1 for v in range(G.n))
