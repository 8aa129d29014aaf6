"""Empirical checks of the random-graph properties the covering argument relies on.

Each check samples vertex sets (uniformly, plus a share of degree-tilted
samples that push toward the tails), evaluates the property on a concrete
graph and reports how often it fails. The properties quantify over all sets,
so a sample can only ever refute, never prove.

When n is too small for a property's size requirements, the sizes are
clamped to what fits and the row is marked ``feasible=False``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph_core import Graph
from .rng import PROPS, make_rng

LEMMA_IDS = {"density_xy": 1, "density_triples": 2, "tuples_expand": 3}
CSV_COLUMNS = ["lemma", "regime", "params", "samples", "violations", "fail_rate", "feasible"]


def chernoff_tail_bound(n: int, p: float, a: float, tail: str) -> float:
    """Binomial tail bounds: exp(-a^2 n p / 2) below (1-a)np, exp(-a^2 n p / 3) above (1+a)np."""
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if tail == "lower":
        return math.exp(-a * a * n * p / 2.0)
    if tail == "upper":
        if not a < 1.5:
            raise ValueError(f"the upper tail bound needs 0 < a < 3/2, got {a}")
        return math.exp(-a * a * n * p / 3.0)
    raise ValueError(f"tail must be 'lower' or 'upper', got {tail!r}")


@dataclass
class PropCheckConfig:
    samples: int = 500
    threshold: float = 0.05  # pass when the violation rate is below this
    seed: int = 0
    tilted_fraction: float = 0.2
    alpha: float = 0.25
    beta: float = 0.25
    ells: tuple[int, ...] = (10, 10_000)
    eps_tilde: float = 0.25

    def validate(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        for name in ("threshold", "alpha", "beta", "eps_tilde"):
            x = getattr(self, name)
            if not 0 < x < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {x}")
        if not 0 <= self.tilted_fraction <= 1:
            raise ValueError("tilted_fraction must lie in [0, 1]")


@dataclass
class PropRow:
    lemma: str
    regime: str
    params: dict
    samples: int = 0
    violations: int = 0
    feasible: bool = True

    @property
    def fail_rate(self) -> float:
        return self.violations / self.samples if self.samples else 0.0

    def as_csv(self) -> list:
        return [
            self.lemma,
            self.regime,
            json.dumps(self.params, sort_keys=True),
            self.samples,
            self.violations,
            f"{self.fail_rate:.6f}",
            int(self.feasible),
        ]


@dataclass
class PropReport:
    lemma: str
    rows: list[PropRow] = field(default_factory=list)
    threshold: float = 0.05

    def row(self, regime: str) -> PropRow:
        for r in self.rows:
            if r.regime == regime:
                return r
        raise KeyError(regime)

    def fail_rate(self, regime: str | None = None) -> float:
        rows = self.rows if regime is None else [self.row(regime)]
        samples = sum(r.samples for r in rows)
        return sum(r.violations for r in rows) / samples if samples else 0.0

    @property
    def passed(self) -> bool:
        return all(r.fail_rate < self.threshold for r in self.rows)

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.as_csv())
        return buf.getvalue()


def _is_tilted(j: int, cfg: PropCheckConfig) -> bool:
    # spread tilted samples evenly through the run
    return math.floor((j + 1) * cfg.tilted_fraction) > math.floor(j * cfg.tilted_fraction)


def _by_degree(pool: np.ndarray, deg: np.ndarray) -> np.ndarray:
    return pool[np.argsort(deg[pool], kind="stable")]


# ---------------------------------------------------------------------------
# edge density between large sets


def _edges_between(G: Graph, X: np.ndarray, Y: np.ndarray) -> int:
    inx = np.zeros(G.n, dtype=bool)
    iny = np.zeros(G.n, dtype=bool)
    inx[X] = True
    iny[Y] = True
    u, v = G.edge_array()
    return int(np.count_nonzero((inx[u] & iny[v]) | (iny[u] & inx[v])))


def density_xy_sizes(n: int, p: float, alpha: float, beta: float) -> dict:
    D = 9.0 / alpha**2
    C = 6.0 / (alpha**2 * beta)
    logn = math.log(n) if n > 1 else 0.0
    need1 = math.ceil(D * logn / p) if p > 0 else n + 1
    size1 = min(need1, n // 2)
    y2 = min(math.ceil(beta * n), n - 1)
    need2 = math.ceil(C / p) if p > 0 else n + 1
    x2 = min(need2, n - y2)
    return {
        "case1": {"x": size1, "y": size1, "feasible": 2 * need1 <= n, "required_x": need1, "required_y": need1},
        "case2": {"x": x2, "y": y2, "feasible": need2 + y2 <= n, "required_x": need2, "required_y": y2},
    }


def check_density_xy(G: Graph, p: float, cfg: PropCheckConfig | None = None) -> PropReport:
    """Sample disjoint X, Y in both size regimes; count e(X,Y) outside (1 +- alpha)|X||Y|p."""
    cfg = cfg or PropCheckConfig()
    cfg.validate()
    n = G.n
    sizes = density_xy_sizes(n, p, cfg.alpha, cfg.beta)
    deg = G.degrees()
    report = PropReport("density_xy", threshold=cfg.threshold)
    for regime_no, regime in enumerate(("case1", "case2"), start=1):
        sz = sizes[regime]
        x, y = sz["x"], sz["y"]
        params = {"n": n, "p": p, "alpha": cfg.alpha, "beta": cfg.beta, "x": x, "y": y}
        params.update(required_x=sz["required_x"], required_y=sz["required_y"])
        row = PropRow("density_xy", regime, params, feasible=sz["feasible"])
        report.rows.append(row)
        if x < 1 or y < 1:
            row.feasible = False
            continue
        rng = make_rng(cfg.seed, PROPS, LEMMA_IDS["density_xy"], regime_no)
        lo, hi = (1 - cfg.alpha) * x * y * p, (1 + cfg.alpha) * x * y * p
        for j in range(cfg.samples):
            perm = rng.permutation(n)
            if _is_tilted(j, cfg):
                # low-degree X against high-degree Y from a random pool
                pool = _by_degree(perm[: min(n, 2 * (x + y))], deg)
                X, Y = pool[:x], pool[::-1][:y]
            else:
                X, Y = perm[:x], perm[x : x + y]
            e = _edges_between(G, X, Y)
            row.samples += 1
            row.violations += int(not lo <= e <= hi)
    return report


# ---------------------------------------------------------------------------
# common neighbors of disjoint pairs inside a set


def triples_bound(n: int, p: float, ell: int, y_size: int) -> tuple[float, str]:
    logn = math.log(n)
    if p <= 0 or ell <= 6 * logn / p**2:
        return 72.0 * ell * logn, "log"
    return 2.0 * ell * y_size * p * p, "linear"


def check_density_triples(G: Graph, p: float, cfg: PropCheckConfig | None = None) -> PropReport:
    """Sample l disjoint pairs and a disjoint 3l-set Y; bound the summed common neighborhoods."""
    cfg = cfg or PropCheckConfig()
    cfg.validate()
    n = G.n
    deg = G.degrees()
    adj = G.adjacency_masks()
    report = PropReport("density_triples", threshold=cfg.threshold)
    for regime_no, ell_req in enumerate(cfg.ells, start=1):
        ell = min(ell_req, n // 5)
        bound, case = triples_bound(n, p, max(ell, 1), 3 * ell)
        params = {"n": n, "p": p, "ell": ell, "ell_requested": ell_req, "bound": bound, "case": case}
        row = PropRow("density_triples", f"ell={ell_req}", params, feasible=ell == ell_req)
        report.rows.append(row)
        if ell < 1:
            row.feasible = False
            continue
        rng = make_rng(cfg.seed, PROPS, LEMMA_IDS["density_triples"], regime_no)
        for j in range(cfg.samples):
            perm = rng.permutation(n)
            if _is_tilted(j, cfg):
                # pairs of high-degree vertices share the most neighbors
                pool = _by_degree(perm[: min(n, 10 * ell)], deg)[::-1]
                pairs, Y = pool[: 2 * ell], pool[2 * ell : 5 * ell]
            else:
                pairs, Y = perm[: 2 * ell], perm[2 * ell : 5 * ell]
            ymask = 0
            for y in Y.tolist():
                ymask |= 1 << y
            pl = pairs.tolist()
            total = sum((adj[pl[2 * a]] & adj[pl[2 * a + 1]] & ymask).bit_count() for a in range(ell))
            row.samples += 1
            row.violations += int(total > bound)
    return report


# ---------------------------------------------------------------------------
# union of common neighborhoods of r-sets


def tuples_expand_sizes(n: int, p: float, r: int, eps_tilde: float) -> dict:
    need = math.ceil(50 * r * math.log(n) / (eps_tilde * p**r)) if p > 0 else n + 1
    L = min(need, n // 2)
    t_max = max(1, int(math.floor(eps_tilde / p))) if p > 0 else 1
    return {"L": L, "required_L": need, "feasible": need <= n - r, "t_max": t_max}


def check_tuples_expand(G: Graph, p: float, r: int, cfg: PropCheckConfig | None = None) -> PropReport:
    """Fix L; sample t <= eps/p distinct r-sets outside L and test |U N*(X_i, L)| in (1 +- sqrt(eps)) t|L|p^r."""
    cfg = cfg or PropCheckConfig()
    cfg.validate()
    if r < 1:
        raise ValueError("r must be at least 1")
    n = G.n
    sz = tuples_expand_sizes(n, p, r, cfg.eps_tilde)
    L_size, t_max = sz["L"], sz["t_max"]
    rng = make_rng(cfg.seed, PROPS, LEMMA_IDS["tuples_expand"], 0)
    perm = rng.permutation(n)
    L = np.sort(perm[:L_size])
    outside = perm[L_size:]
    lmask = 0
    for v in L.tolist():
        lmask |= 1 << v
    params = {"n": n, "p": p, "r": r, "eps_tilde": cfg.eps_tilde, "L": L_size, "required_L": sz["required_L"], "t_max": t_max}
    row = PropRow("tuples_expand", "all", params, feasible=sz["feasible"])
    report = PropReport("tuples_expand", [row], threshold=cfg.threshold)
    if L_size < 1 or outside.size < r:
        row.feasible = False
        return report
    deg = G.degrees()
    slack = math.sqrt(cfg.eps_tilde)
    for j in range(cfg.samples):
        t = int(rng.integers(1, t_max + 1))
        if _is_tilted(j, cfg):
            # overlapping low-degree r-sets shrink the union
            pool = _by_degree(outside[rng.permutation(outside.size)[: min(outside.size, 4 * (r + t))]], deg)
            base = pool[: r - 1].tolist()
            extra = pool[r - 1 :].tolist()
            sets = {tuple(sorted(base + [extra[a]])) for a in range(min(t, len(extra)))}
        else:
            sets = set()
            while len(sets) < t:
                sets.add(tuple(sorted(rng.choice(outside, size=r, replace=False).tolist())))
        t_eff = len(sets)
        union = 0
        for X in sets:
            common = lmask
            for x in X:
                common &= G.adj(x)
            union |= common
        size = union.bit_count()
        target = t_eff * L_size * p**r
        row.samples += 1
        row.violations += int(not (1 - slack) * target <= size <= (1 + slack) * target)
    return report


def run_all(G: Graph, p: float, r: int, cfg: PropCheckConfig | None = None) -> list[PropReport]:
    cfg = cfg or PropCheckConfig()
    return [check_density_xy(G, p, cfg), check_density_triples(G, p, cfg), check_tuples_expand(G, p, r, cfg)]
