"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or through pytest,
where the collected lines are repeated in the terminal summary.
"""

from __future__ import annotations

import itertools
import math
import os
import random
import sys
import tempfile
import time

import numpy as np
import pytest

from monocover.cascade_cover import SmallSetParams, cover_small_set
from monocover.dfs_cover import HoleParams, dfs_decompose, gendfs_cover, uncovered_bound
from monocover.gnp_gen import (
    ColoringSpec,
    GnpParams,
    apply_coloring,
    color_uniform,
    monochromatic_components,
    sample_gnp,
)
from monocover.graph_core import ColoredGraph, Graph, VertexSet, edge_count_between, is_valid_mono_cycle, verify_cover
from monocover.approx_cover import ApproxParams, approx_cover_small_set
from monocover.harness import config_from_dict, cover_all, run_experiment
from monocover.oracle import (
    HypergraphFamily,
    find_disjoint_hyperedge_system,
    haxell_condition_check,
    is_complement_Kkm_free,
    max_disjoint_cycle_coverage,
    min_mono_cycle_cover_exact,
)
from monocover.prop_suite import PropCheckConfig, check_density_xy, check_tuples_expand
from monocover.towers import (
    InfeasibleLevel,
    build_levels,
    cascade_between,
    check_tower,
    compute_params,
    make_cascade,
    towers_or_cascade,
)

RESULTS: list[str] = []
HOLES = [(2, 1), (2, 2), (3, 1)]


def record(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)


def _masks_graph(n: int, code: int, pairs) -> Graph:
    adj = [0] * n
    for j, (a, b) in enumerate(pairs):
        if (code >> j) & 1:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
    return Graph.from_masks(n, adj)


def _gendfs_violation(G: Graph, k: int, m: int) -> str | None:
    cov = gendfs_cover(G, HoleParams(k, m))
    if len(cov.cycles) > k - 1:
        return f"{len(cov.cycles)} cycles"
    used = 0
    for c in cov.cycles:
        vs = c.vertices
        if len(vs) < 3 or len(set(vs)) != len(vs):
            return f"improper cycle {vs}"
        if any(not G.has_edge(vs[j], vs[(j + 1) % len(vs)]) for j in range(len(vs))):
            return f"non-edge in {vs}"
        bits = sum(1 << v for v in vs)
        if bits & used:
            return "cycles overlap"
        used |= bits
    unc = G.n - used.bit_count()
    if unc > uncovered_bound(HoleParams(k, m)):
        return f"{unc} uncovered"
    return None


# ---------------------------------------------------------------------------


def test_c01_gendfs_guarantee_exhaustive():
    t0 = time.perf_counter()
    checked = violations = 0
    first = None
    for n in range(1, 8):
        pairs = list(itertools.combinations(range(n), 2))
        for code in range(1 << len(pairs)):
            G = _masks_graph(n, code, pairs)
            for k, m in HOLES:
                if is_complement_Kkm_free(G, k, m):
                    checked += 1
                    bad = _gendfs_violation(G, k, m)
                    if bad:
                        violations += 1
                        first = first or (n, code, k, m, bad)
    exhaustive = checked
    rng = random.Random(20240)
    for _ in range(100_000):
        n = rng.randint(8, 12)
        p = rng.uniform(0.3, 1.0)
        pairs = list(itertools.combinations(range(n), 2))
        code = sum(1 << j for j in range(len(pairs)) if rng.random() < p)
        G = _masks_graph(n, code, pairs)
        for k, m in HOLES:
            if is_complement_Kkm_free(G, k, m):
                checked += 1
                bad = _gendfs_violation(G, k, m)
                if bad:
                    violations += 1
                    first = first or (n, code, k, m, bad)
    dt = time.perf_counter() - t0
    ok = violations == 0 and dt < 600
    record(1, ok, f"{checked} hole-free cases ({exhaustive} exhaustive on <=7 vertices), {violations} violations, {dt:.0f}s")
    assert violations == 0, first
    assert dt < 600


def test_c02_dfs_invariants():
    rng = random.Random(7)
    violations = 0
    for _ in range(10_000):
        n = rng.randint(1, 30)
        p = rng.random()
        pairs = list(itertools.combinations(range(n), 2))
        G = _masks_graph(n, sum(1 << j for j in range(len(pairs)) if rng.random() < p), pairs)
        m = rng.randint(1, n)
        s = dfs_decompose(G, m)
        P = VertexSet(n, s.P)
        ok = (
            len(s.D) == m
            and len(P) == len(s.P)
            and edge_count_between(G, s.D, s.U) == 0
            and (s.D.bits | P.bits | s.U.bits) == (1 << n) - 1
            and len(s.D) + len(P) + len(s.U) == n
        )
        violations += not ok
    record(2, violations == 0, f"10000 instances, {violations} violations")
    assert violations == 0


def test_c03_tightness_of_uncovered_count():
    violations = 0
    cases = 0
    for k in (2, 3):
        for n in range(k - 1, 10):
            sizes = [len(a) for a in np.array_split(np.arange(n), k - 1)]
            edges, start = [], 0
            for s in sizes:
                edges += list(itertools.combinations(range(start, start + s), 2))
                start += s
            G = Graph(n, edges)
            free = all(is_complement_Kkm_free(G, k, m) for m in range(1, n + 1))
            best = max_disjoint_cycle_coverage(G, k - 2)
            cases += 1
            violations += not (free and best <= n - n // (k - 1))
    record(3, violations == 0, f"{cases} clique unions, {violations} violations")
    assert violations == 0


def test_c04_approx_cover_validity_and_budget():
    t0 = time.perf_counter()
    bad, worst, unc = 0, 0, []
    for trial in range(50):
        G = sample_gnp(GnpParams(3000, 0.15, 1000 + trial))
        CG = color_uniform(G, 2, 1000 + trial)
        W = VertexSet(3000, range(150))
        cov = approx_cover_small_set(CG, W, ApproxParams(r=2, hole_c=0.15))
        rep = verify_cover(CG, cov, require_disjoint=True)
        worst = max(worst, len(cov.cycles))
        unc.append(rep.uncovered_count)
        bad += not (rep.valid and len(cov.cycles) <= 12)
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 300
    record(4, ok, f"50 trials, {bad} failures, max cycles {worst}, uncovered mean {np.mean(unc):.1f} max {max(unc)}, {dt:.0f}s")
    assert bad == 0 and dt < 300


def test_c05_oracle_dominance():
    rng = random.Random(5)
    bad = 0
    for j in range(200):
        n = rng.randint(2, 9)
        r = rng.randint(1, 3)
        p = rng.uniform(0.2, 1.0)
        triples = [(a, b, rng.randint(1, r)) for a, b in itertools.combinations(range(n), 2) if rng.random() < p]
        CG = ColoredGraph.from_colored_edges(n, r, triples)
        exact = min_mono_cycle_cover_exact(CG).size
        pipeline = ("approx", "cascade", "full")[j % 3]
        cfg = config_from_dict({"n": n, "r": r, "seed": j, "parts": rng.randint(1, 3), "pipeline": pipeline})
        cov, _ = cover_all(CG, cfg)
        rep = verify_cover(CG, cov)
        bad += not (rep.valid and rep.uncovered_count == 0 and len(cov.cycles) >= exact)
    record(5, bad == 0, f"200 graphs, {bad} violations")
    assert bad == 0


def test_c06_lower_bound_coloring():
    bad = 0
    oracle_runs = 0
    for j in range(50):
        n = 6 + j % 5 if j % 2 == 0 else 20 + 4 * j
        r = 2 + j % 3
        G = sample_gnp(GnpParams(n, 0.3 + 0.01 * (j % 20), 600 + j))
        CG, info = apply_coloring(G, ColoringSpec("bal_debiasio", r, 600 + j))
        X = set(info["X"])
        for c in range(1, r + 1):
            for comp in monochromatic_components(CG, c):
                bad += len(X.intersection(comp)) > 1
        if n <= 10:
            oracle_runs += 1
            bad += min_mono_cycle_cover_exact(CG).size < len(X)
    record(6, bad == 0, f"50 instances ({oracle_runs} checked by the exact oracle), {bad} violations")
    assert bad == 0


def test_c07_density_statistics():
    t0 = time.perf_counter()
    G = sample_gnp(GnpParams(5000, 0.05, 13))
    cfg = PropCheckConfig(samples=500, seed=13, alpha=0.25, beta=0.25)
    rep = check_density_xy(G, 0.05, cfg)
    rates = {row.regime: row.fail_rate for row in rep.rows}
    inv = check_density_xy(Graph(5000), 0.05, PropCheckConfig(samples=100, seed=13)).fail_rate()
    dt = time.perf_counter() - t0
    feas = {row.regime: row.feasible for row in rep.rows}
    ok = all(v < 0.05 for v in rates.values()) and inv >= 0.99 and dt < 120
    record(7, ok, f"fail rates {rates} (size-feasible {feas}), edgeless {inv:.2f}, {dt:.0f}s")
    assert ok


def test_c08_tuple_expansion_statistics():
    n = 20_000
    p = n**-0.3
    G = sample_gnp(GnpParams(n, p, 19))
    rep = check_tuples_expand(G, p, 2, PropCheckConfig(samples=100, seed=19, eps_tilde=0.25))
    row = rep.rows[0]
    ok = row.fail_rate < 0.05
    record(8, ok, f"fail rate {row.fail_rate:.3f} over {row.samples} samples (L={row.params['L']}, size-feasible {row.feasible})")
    assert ok


def _structural_run(n, p, seed, qsize, eps, m=None):
    CG = color_uniform(sample_gnp(GnpParams(n, p, seed)), 2, seed)
    Q = VertexSet(n, range(qsize))
    lv = build_levels(n, Q, eps, seed)
    cp = compute_params(n, p, 2, eps, min(lv.sizes()), m=m)
    rng = random.Random(seed)
    towers = cascades = infeasible = bad = 0
    families = []
    for _ in range(100):
        X = sorted(rng.sample(range(qsize), 3))
        try:
            res = towers_or_cascade(CG, lv, cp, X)
        except InfeasibleLevel:
            infeasible += 1
            continue
        for tw in res.towers:
            towers += 1
            bad += not check_tower(CG, lv, tw, cp)
        if res.cascade is not None:
            cascades += 1
            c = res.cascade
            bad += cascade_between(CG, c.tower_v, c.tower_w, cp) != c.mode
        else:
            families.append(res.family)
    for F, H in itertools.combinations(families[:30], 2):
        if set(F.bases) & set(H.bases):
            continue
        for color in (1, 2):
            c = make_cascade(CG, F.towers[color], H.towers[color], cp)
            if c is not None:
                cascades += 1
                bad += cascade_between(CG, c.tower_v, c.tower_w, cp) != c.mode
    cov = cover_small_set(CG, Q, SmallSetParams(eps=eps, seed=seed, m=m, sample_budget=100))
    d = cov.diagnostics
    lifted = [c for c in cov.cycles if len(c.vertices) > 1]
    bad += sum(not is_valid_mono_cycle(CG, c) for c in lifted)
    limit = 2 * cp.m + 1
    bad += sum(max(lengths) > limit for lengths in d["lift_path_edges"])
    bad += not verify_cover(CG, cov, require_disjoint=True).valid
    return {
        "towers": towers,
        "cascades": cascades,
        "infeasible": infeasible,
        "bad": bad,
        "mu": cp.mu,
        "m": cp.m,
        "lifts": f"{d['lift_successes']}/{d['lift_attempts']}",
    }


def test_c09_tower_cascade_soundness():
    t0 = time.perf_counter()
    desk = _structural_run(20_000, 20_000**-0.3, 5, 98, 0.2)
    grown = _structural_run(10_000, 0.1, 7, 50, 0.25, m=3)
    dt = time.perf_counter() - t0
    ok = desk["bad"] == 0 and grown["bad"] == 0
    record(9, ok, f"desk {desk}; mu>=2 {grown}; {dt:.0f}s")
    assert ok


def test_c10_haxell_cross_check():
    rng = random.Random(10)
    holds = refuted = 0
    for j in range(200):
        a = 1 + j % 3
        t = 1 + rng.randint(0, 4)
        nv = rng.randint(a * t, min(20, a * t + 8))
        ground = list(range(nv))
        fams = []
        for _ in range(t):
            size = rng.randint(1, 6 if a > 1 else 4)
            fams.append({frozenset(rng.sample(ground, a)) for _ in range(size)})
        fam = HypergraphFamily(nv, [sorted(f, key=sorted) for f in fams], a)
        if haxell_condition_check(fam):
            holds += 1
            refuted += find_disjoint_hyperedge_system(fam) is None
    ok = refuted == 0 and holds > 0
    record(10, ok, f"200 families, condition held for {holds}, {refuted} refutations")
    assert ok


def test_c11_determinism():
    base = {"n": 120, "p": 0.3, "r": 2, "seed": 11, "parts": 2, "trials": 4}
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        for tag, jobs in (("a", 1), ("b", 1), ("c", 2)):
            out = os.path.join(tmp, tag)
            run_experiment(config_from_dict(dict(base, jobs=jobs, out=out)))
            files = {}
            for name in ("report.json", "summary.csv"):
                with open(os.path.join(out, name), "rb") as fh:
                    files[name] = fh.read()
            outputs.append(files)
    ok = outputs[0] == outputs[1] == outputs[2]
    record(11, ok, "rerun and parallel (2 jobs) reports are byte-identical" if ok else "reports differ")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
