"""Leveled neighborhood structures connecting pairs of vertices of a small set.

The vertices outside the target set W are split into levels L_1..L_t. A tower
of color i on a base vertex v is a sequence of level sets S_{s-1}, S_s, ..., S_f
that grow by a factor mu per level, where every vertex of S_k is reachable from
v by a color-i path through one vertex per level. Witness sets T_k (r-1
vertices of W each) restrict every level to a common neighborhood, which
keeps towers on different bases nearly disjoint.

A cascade joins two same-colored towers: either they end in the same top set
(mode C1), or both end at the last level m and color i carries at least a
1/r share of the edges between the two top-set differences (mode C2).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .graph_core import ColoredGraph, VertexSet, iter_bits, lowest
from .rng import PIPELINE, make_rng

C1 = "C1"
C2 = "C2"


class InfeasibleLevel(Exception):
    """A level did not contain enough common neighbors of one color pattern."""

    def __init__(self, level: int, z_size: int, largest_bucket: int, needed: int):
        super().__init__(
            f"level {level}: {z_size} candidates, largest color-pattern bucket {largest_bucket}, need {needed}"
        )
        self.level = level
        self.z_size = z_size
        self.largest_bucket = largest_bucket
        self.needed = needed


class ParameterError(ValueError):
    pass


# ---------------------------------------------------------------------------
# levels and parameters


@dataclass
class LevelPartition:
    n: int
    eps: float
    base: VertexSet  # L_0 = W
    levels: list[VertexSet]  # L_1..L_t

    @property
    def t(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> VertexSet:
        return self.base if k == 0 else self.levels[k - 1]

    def sizes(self) -> list[int]:
        return [len(L) for L in self.levels]


def num_levels(eps: float) -> int:
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    t = int(math.floor(1.0 / eps + 0.5))
    if abs(1.0 / eps - t) > 1e-6 * t:
        raise ValueError(f"1/eps must be an integer, got 1/{eps} = {1.0 / eps}")
    return t


def build_levels(n: int, W: VertexSet, eps: float, seed: int = 0) -> LevelPartition:
    """Split U = V \\ W into 1/eps levels of equal size (+-1) by a seeded shuffle."""
    t = num_levels(eps)
    if W.n != n:
        raise ValueError("W lives on a different vertex set")
    U = W.complement().to_list()
    if len(U) < t:
        raise ValueError(f"|U| = {len(U)} is smaller than the number of levels {t}")
    perm = make_rng(seed, PIPELINE, 7).permutation(np.asarray(U, dtype=np.int64))
    parts = np.array_split(perm, t)
    return LevelPartition(n, eps, W, [VertexSet(n, sorted(part.tolist())) for part in parts])


@dataclass
class CascadeParams:
    r: int
    p: float
    eps: float
    q: int
    mu: int
    m: int
    mu_raw: float = 0.0
    mu_floored: bool = False
    m_capped: bool = False
    strict: bool = False

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "p": self.p,
            "eps": self.eps,
            "q": self.q,
            "mu": self.mu,
            "m": self.m,
            "mu_raw": self.mu_raw,
            "mu_floored": self.mu_floored,
            "m_capped": self.m_capped,
            "strict": self.strict,
        }


def max_level_from_q(q: int, r: int) -> tuple[int, bool]:
    """Smallest m with m - 1 <= (q-1)/r < m; flags whether the left side is tight."""
    m = (q - 1) // r + 1
    return m, (q - 1) % r == 0


def compute_params(
    n: int,
    p: float,
    r: int,
    eps: float,
    level_size: int,
    strict: bool = False,
    mu: int | None = None,
    m: int | None = None,
    q: int | None = None,
) -> CascadeParams:
    """Tower growth factor mu and top level m.

    mu = floor(level_size p^r / (2 r^r)), raised to 1 (and flagged) when the
    level is too small. q is the nearest integer to 1/(eps r), and m is the
    integer strictly above (q-1)/r, capped at the number of levels.
    """
    if level_size < 1:
        raise ValueError("level_size must be at least 1")
    if r < 1:
        raise ValueError("r must be at least 1")
    t = num_levels(eps)
    mu_raw = level_size * p**r / (2.0 * r**r)
    floored = False
    if mu is None:
        mu = int(math.floor(mu_raw + 1e-9))
        if mu < 1:
            if strict:
                raise ParameterError(f"growth factor {mu_raw:.4g} < 1 at level size {level_size}")
            mu, floored = 1, True
    elif mu < 1:
        raise ValueError("mu override must be at least 1")
    if q is None:
        q = max(1, int(math.floor(1.0 / (eps * r) + 0.5)))
    m_auto, tight = max_level_from_q(q, r)
    if strict and tight:
        raise ParameterError(f"r={r} divides q-1={q - 1}; no integer m satisfies the strict inequalities")
    if m is None:
        m = m_auto
    elif not 1 <= m <= t:
        raise ValueError(f"m override must lie in 1..{t}, got {m}")
    capped = m > t
    m = min(m, t)
    return CascadeParams(r, p, eps, q, mu, m, mu_raw, floored, capped, strict)


# ---------------------------------------------------------------------------
# towers


@dataclass
class Tower:
    color: int
    base: int
    s: int
    f: int
    sets: dict[int, VertexSet]  # k -> S_k for k in s-1..f
    witness: dict[int, frozenset[int]]  # k -> T_k for k in s..f

    def top(self) -> VertexSet:
        return self.sets[self.f]

    def extended(self, k: int, S_k: VertexSet, T_k: frozenset[int]) -> Tower:
        sets = dict(self.sets)
        sets[k] = S_k
        witness = dict(self.witness)
        witness[k] = T_k
        return Tower(self.color, self.base, self.s, k, sets, witness)

    def to_dict(self) -> dict:
        return {
            "color": self.color,
            "base": self.base,
            "s": self.s,
            "f": self.f,
            "sets": {str(k): S.to_list() for k, S in sorted(self.sets.items())},
            "witness": {str(k): sorted(T) for k, T in sorted(self.witness.items())},
        }


@dataclass
class TowerCheck:
    ok: bool
    condition: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _union_nbhd(CG: ColoredGraph, S: VertexSet, color: int | None = None) -> int:
    acc = 0
    for u in S:
        acc |= CG.adj(u, color)
    return acc


def _common_nbhd(CG: ColoredGraph, T) -> int:
    acc = -1
    for u in T:
        acc &= CG.adj(u)
    return acc


def check_tower(CG: ColoredGraph, levels: LevelPartition, tw: Tower, params: CascadeParams) -> TowerCheck:
    """Evaluate conditions T1-T4 literally; reports the first violated one."""
    r, mu, m = params.r, params.mu, params.m
    s, f, i = tw.s, tw.f, tw.color
    if not 1 <= s <= f <= m:
        return TowerCheck(False, "T1", f"levels s={s}, f={f} outside 1..{m}")
    if tw.base not in levels.base:
        return TowerCheck(False, "T1", f"base vertex {tw.base} is not in L_0")
    for k in range(s - 1, f + 1):
        S = tw.sets.get(k)
        if S is None:
            return TowerCheck(False, "T1", f"missing level set S_{k}")
        if not S <= levels.level(k):
            return TowerCheck(False, "T1", f"S_{k} leaves level {k}")
        if len(S) != mu**k:
            return TowerCheck(False, "T1", f"|S_{k}| = {len(S)}, expected {mu**k}")
    for k in range(s, f + 1):
        T = tw.witness.get(k)
        if T is None or len(T) != r - 1 or not all(x in levels.base for x in T):
            return TowerCheck(False, "T2" if k == s else "T3", f"witness T_{k} is not an (r-1)-subset of L_0")
    allowed = CG.adj(tw.base, i) & _union_nbhd(CG, tw.sets[s - 1]) & _common_nbhd(CG, tw.witness[s])
    bad = tw.sets[s].bits & ~allowed
    if bad:
        return TowerCheck(False, "T2", f"vertex {lowest(bad)} of S_{s} breaks the base/witness adjacency")
    for k in range(s + 1, f + 1):
        allowed = _union_nbhd(CG, tw.sets[k - 1], i) & _common_nbhd(CG, tw.witness[k])
        bad = tw.sets[k].bits & ~allowed
        if bad:
            return TowerCheck(False, "T3", f"vertex {lowest(bad)} of S_{k} breaks the level/witness adjacency")
    if s > 1:
        if tw.base not in tw.witness[s]:
            return TowerCheck(False, "T4", f"base {tw.base} missing from T_{s}")
    else:
        if tw.sets[0].to_list() != [tw.base]:
            return TowerCheck(False, "T4", "S_0 must be the base vertex alone")
        if tw.base in tw.witness[1]:
            return TowerCheck(False, "T4", f"base {tw.base} must not lie in T_1")
    return TowerCheck(True)


# ---------------------------------------------------------------------------
# cascades


@dataclass
class Cascade:
    color: int
    v: int
    w: int
    tower_v: Tower
    tower_w: Tower
    mode: str
    vacuous: bool = False  # C2 with no edges between the top differences

    def to_dict(self) -> dict:
        return {
            "color": self.color,
            "v": self.v,
            "w": self.w,
            "mode": self.mode,
            "vacuous": self.vacuous,
            "tower_v": self.tower_v.to_dict(),
            "tower_w": self.tower_w.to_dict(),
        }


def cross_edge_counts(CG: ColoredGraph, A: VertexSet, B: VertexSet) -> np.ndarray:
    """Edge counts between disjoint A and B, per color (index 0 = all colors)."""
    out = np.zeros(CG.r + 1, dtype=np.int64)
    for a in A:
        for i in range(1, CG.r + 1):
            out[i] += (CG.adj(a, i) & B.bits).bit_count()
    out[0] = out[1:].sum()
    return out


def cascade_between(CG: ColoredGraph, tower_v: Tower, tower_w: Tower, params: CascadeParams) -> str | None:
    """C1 if the tops coincide; C2 if f = m and color i has a 1/r share of R_v-R_w edges."""
    if tower_v.color != tower_w.color:
        raise ValueError(f"towers have different colors {tower_v.color} and {tower_w.color}")
    if tower_v.f != tower_w.f:
        raise ValueError(f"towers end at different levels {tower_v.f} and {tower_w.f}")
    top_v, top_w = tower_v.top(), tower_w.top()
    if top_v == top_w:
        return C1
    if tower_v.f != params.m:
        return None
    counts = cross_edge_counts(CG, top_v - top_w, top_w - top_v)
    # e_i >= e / r, compared in integers
    return C2 if params.r * counts[tower_v.color] >= counts[0] else None


def make_cascade(CG: ColoredGraph, tower_v: Tower, tower_w: Tower, params: CascadeParams) -> Cascade | None:
    mode = cascade_between(CG, tower_v, tower_w, params)
    if mode is None:
        return None
    vacuous = False
    if mode == C2:
        top_v, top_w = tower_v.top(), tower_w.top()
        vacuous = int(cross_edge_counts(CG, top_v - top_w, top_w - top_v)[0]) == 0
    if tower_v.base > tower_w.base:
        tower_v, tower_w = tower_w, tower_v
    return Cascade(tower_v.color, tower_v.base, tower_w.base, tower_v, tower_w, mode, vacuous)


@dataclass
class TowerFamily:
    """r towers of pairwise distinct colors sharing one top set at level m."""

    towers: dict[int, Tower]  # color -> tower
    top: VertexSet

    @property
    def bases(self) -> list[int]:
        return [self.towers[c].base for c in sorted(self.towers)]


@dataclass
class GrowthResult:
    cascade: Cascade | None = None
    family: TowerFamily | None = None
    towers: list[Tower] = field(default_factory=list)  # every tower built on the way
    level_stats: list[dict] = field(default_factory=list)


def _pattern_buckets(CG: ColoredGraph, Z: int, anchors_of) -> dict[tuple[int, ...], list[int]]:
    buckets: dict[tuple[int, ...], list[int]] = {}
    for z in iter_bits(Z, CG.n):
        pattern = tuple(CG.color_of(z, a) for a in anchors_of(z))
        buckets.setdefault(pattern, []).append(z)
    return buckets


def _largest_bucket(buckets: dict[tuple[int, ...], list[int]]) -> tuple[tuple[int, ...], list[int]]:
    # largest size first, then the lexicographically least pattern
    pattern = min(buckets, key=lambda pat: (-len(buckets[pat]), pat))
    return pattern, buckets[pattern]


def _first_repeat(pattern: tuple[int, ...]) -> tuple[int, int] | None:
    for a in range(len(pattern)):
        for b in range(a + 1, len(pattern)):
            if pattern[a] == pattern[b]:
                return a, b
    return None


def towers_or_cascade(CG: ColoredGraph, levels: LevelPartition, params: CascadeParams, Xhat) -> GrowthResult:
    """Grow towers on a (2r-1)-subset of L_0 level by level.

    Returns either a C1 cascade between two vertices of ``Xhat`` or r towers of
    distinct colors with a common top set at level m. Raises
    :class:`InfeasibleLevel` when a level lacks mu^k same-pattern candidates.
    """
    r, mu, m = params.r, params.mu, params.m
    if r < 2:
        raise ValueError("towers need r >= 2: a cascade joins two distinct base vertices")
    X = sorted(int(x) for x in Xhat)
    if len(set(X)) != 2 * r - 1:
        raise ValueError(f"Xhat must have {2 * r - 1} distinct vertices, got {len(set(X))}")
    if not all(x in levels.base for x in X):
        raise ValueError("Xhat must lie in L_0")
    if m > levels.t:
        raise ValueError(f"m={m} exceeds the number of levels {levels.t}")
    out = GrowthResult()
    n = CG.n

    # level 1: common neighbors of x_1..x_r
    X1 = X[:r]
    Z = _common_nbhd(CG, X1) & levels.level(1).bits
    buckets = _pattern_buckets(CG, Z, lambda z: X1)
    need = mu
    largest = max((len(b) for b in buckets.values()), default=0)
    out.level_stats.append({"level": 1, "z_size": Z.bit_count(), "largest_bucket": largest, "needed": need})
    if largest < need:
        raise InfeasibleLevel(1, Z.bit_count(), largest, need)
    pattern, members = _largest_bucket(buckets)
    S = VertexSet(n, members[:need])
    built = []
    for a, x in enumerate(X1):
        tw = Tower(pattern[a], x, 1, 1, {0: VertexSet(n, [x]), 1: S}, {1: frozenset(X1) - {x}})
        built.append(tw)
    out.towers += built
    rep = _first_repeat(pattern)
    if rep is not None:
        a, b = rep
        out.cascade = make_cascade(CG, built[a], built[b], params)
        return out
    current = {tw.color: tw for tw in built}

    for k in range(2, m + 1):
        used = {tw.base for tw in current.values()}
        Xp = [x for x in X if x not in used]  # w_1..w_{r-1}
        below = S
        Z = _common_nbhd(CG, Xp) & _union_nbhd(CG, below) & levels.level(k).bits

        def anchors(z: int) -> list[int]:
            return Xp + [lowest(CG.adj(z) & below.bits)]  # lowest neighbor in S_{k-1}

        buckets = _pattern_buckets(CG, Z, anchors)
        need = mu**k
        largest = max((len(b) for b in buckets.values()), default=0)
        out.level_stats.append({"level": k, "z_size": Z.bit_count(), "largest_bucket": largest, "needed": need})
        if largest < need:
            raise InfeasibleLevel(k, Z.bit_count(), largest, need)
        pattern, members = _largest_bucket(buckets)
        S = VertexSet(n, members[:need])
        T = frozenset(Xp)
        built = [Tower(pattern[j], w, k, k, {k - 1: below, k: S}, {k: T}) for j, w in enumerate(Xp)]
        built.append(current[pattern[-1]].extended(k, S, T))
        out.towers += built
        rep = _first_repeat(pattern)
        if rep is not None:
            a, b = rep
            out.cascade = make_cascade(CG, built[a], built[b], params)
            return out
        current = {tw.color: tw for tw in built}

    out.family = TowerFamily(current, S)
    return out


def select_independent_towers(towers: list[Tower]) -> list[int]:
    """Greedy indices of towers whose sets T_s + {v}, v in S_{s-1}, never collide."""
    bases = [tw.base for tw in towers]
    if len(set(bases)) != len(bases):
        raise ValueError("towers must sit on distinct base vertices")
    keys = []
    for tw in towers:
        T = tw.witness[tw.s]
        keys.append({T | {v} for v in tw.sets[tw.s - 1]})
    taken: set[frozenset[int]] = set()
    chosen = []
    for j, ks in enumerate(keys):
        if ks.isdisjoint(taken):
            chosen.append(j)
            taken |= ks
    return chosen


def towers_collide(a: Tower, b: Tower) -> bool:
    ka = {a.witness[a.s] | {v} for v in a.sets[a.s - 1]}
    kb = {b.witness[b.s] | {v} for v in b.sets[b.s - 1]}
    return not ka.isdisjoint(kb)


def level_overlap_stats(towers: list[Tower], mu: int) -> dict[int, dict]:
    """Per level k: fraction of each S_k shared with the other towers' S_k (mean, max)."""
    by_level: dict[int, list[tuple[int, int]]] = {}
    for j, tw in enumerate(towers):
        for k, S in tw.sets.items():
            if k >= tw.s:
                by_level.setdefault(k, []).append((j, S.bits))
    out = {}
    for k, items in sorted(by_level.items()):
        counts = Counter()
        distinct = {}
        for j, bits in items:
            distinct.setdefault(bits, j)
        for bits in distinct:
            for v in iter_bits(bits):
                counts[v] += 1
        fracs = []
        for bits in distinct:
            shared = sum(1 for v in iter_bits(bits) if counts[v] > 1)
            fracs.append(shared / mu**k)
        out[k] = {"sets": len(distinct), "mean": float(np.mean(fracs)), "max": float(max(fracs))}
    return out
