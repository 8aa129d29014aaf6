"""End-to-end covering pipeline, experiment runner and report files.

The vertex set is split into parts. Each part is first covered approximately
by a few long disjoint cycles, then its uncovered remainder goes through the
cascade construction, then a greedy pass over whatever is still left, and
finally single-vertex cycles guarantee that nothing stays uncovered.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .approx_cover import ApproxParams, approx_cover_small_set, edge_density
from .cascade_cover import SmallSetParams, cover_small_set, longest_back_edge_cycle, small_set_budget
from .gnp_gen import COLORING_MODES, ColoringSpec, GnpParams, apply_coloring, sample_gnp
from .graph_core import (
    ColoredGraph,
    Cover,
    Cycle,
    EdgeListParseError,
    VertexSet,
    format_edge_list,
    iter_bits,
    lowest,
    parse_edge_list,
    verify_cover,
)
from .oracle import MAX_COVER_N, min_mono_cycle_cover_exact
from .rng import PIPELINE, derive_seed, make_rng

SCHEMA_VERSION = 1
PIPELINES = ("approx", "cascade", "full")
SUMMARY_COLUMNS = [
    "schema_version",
    "trial",
    "n",
    "p",
    "r",
    "seed",
    "pipeline",
    "parts",
    "edges",
    "cover_size",
    "approx_cycles",
    "cascade_cycles",
    "residual_cycles",
    "degenerate_cycles",
    "uncovered",
    "valid",
    "budget_approx",
    "budget_small_set",
    "budget_global",
]
EXIT_OK, EXIT_INVALID, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
PART_DETAIL_LIMIT = 8


class ConfigError(ValueError):
    def __init__(self, field_name: str, msg: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field_name}: {msg}")
        self.field = field_name
        self.line = line


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    gnp: GnpParams
    coloring: ColoringSpec = field(default_factory=ColoringSpec)
    pipeline: str = "full"
    parts: int | None = None  # None: min((101 r)^4, n)
    approx: dict = field(default_factory=dict)  # ApproxParams overrides
    cascade: dict = field(default_factory=dict)  # SmallSetParams overrides
    trials: int = 1
    out: str | None = None
    jobs: int = 1
    oracle_check: bool = False

    @property
    def r(self) -> int:
        return self.coloring.r

    def validate(self) -> None:
        g = self.gnp
        if not isinstance(g.n, int) or isinstance(g.n, bool) or g.n < 1:
            raise ConfigError("n", f"must be a positive integer, got {g.n!r}")
        try:
            p = float(g.p)
        except (TypeError, ValueError):
            raise ConfigError("p", f"must be a number, got {g.p!r}") from None
        if not 0.0 <= p <= 1.0 or math.isnan(p):
            raise ConfigError("p", f"must lie in [0, 1], got {g.p!r}")
        if not isinstance(g.seed, int) or g.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {g.seed!r}")
        c = self.coloring
        if not isinstance(c.r, int) or c.r < 1:
            raise ConfigError("r", f"must be a positive integer, got {c.r!r}")
        if c.mode not in COLORING_MODES:
            raise ConfigError("coloring", f"unknown mode {c.mode!r}; expected one of {COLORING_MODES}")
        if c.mode == "from_file" and not c.path:
            raise ConfigError("coloring", "file coloring needs a path")
        if c.mode == "bal_debiasio" and c.r < 2:
            raise ConfigError("coloring", "bal_debiasio needs r >= 2")
        if self.pipeline not in PIPELINES:
            raise ConfigError("pipeline", f"must be one of {PIPELINES}, got {self.pipeline!r}")
        if self.parts is not None and (not isinstance(self.parts, int) or self.parts < 1):
            raise ConfigError("parts", f"must be a positive integer, got {self.parts!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials", f"must be a positive integer, got {self.trials!r}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError("jobs", f"must be a positive integer, got {self.jobs!r}")
        approx_fields = {f.name for f in dataclasses.fields(ApproxParams)} - {"r"}
        for k in self.approx:
            if k not in approx_fields:
                raise ConfigError(f"approx.{k}", "unknown field")
        cascade_fields = {f.name for f in dataclasses.fields(SmallSetParams)}
        for k in self.cascade:
            if k not in cascade_fields:
                raise ConfigError(f"cascade.{k}", "unknown field")

    def report_dict(self) -> dict:
        """The parts of the config that determine results (no paths, no job count)."""
        return {
            "n": self.gnp.n,
            # a loaded graph ignores p
            "p": None if self.coloring.mode == "from_file" else float(self.gnp.p),
            "seed": self.gnp.seed,
            "r": self.coloring.r,
            "coloring": self.coloring.mode,
            "coloring_file": os.path.basename(self.coloring.path) if self.coloring.path else None,
            "pipeline": self.pipeline,
            "parts": self.parts,
            "approx": dict(sorted(self.approx.items())),
            "cascade": dict(sorted(self.cascade.items())),
            "trials": self.trials,
            "oracle_check": self.oracle_check,
        }

    def to_dict(self) -> dict:
        d = self.report_dict()
        d.update(p=float(self.gnp.p), coloring_path=self.coloring.path, out=self.out, jobs=self.jobs)
        d.pop("coloring_file")
        return d


_TOP_KEYS = {"n", "p", "seed", "r", "coloring", "coloring_path", "pipeline", "parts", "approx", "cascade", "trials", "out", "jobs", "oracle_check"}


def config_from_dict(d: dict, lines: dict[str, int] | None = None) -> ExperimentConfig:
    lines = lines or {}
    for k in d:
        if k not in _TOP_KEYS:
            raise ConfigError(k, "unknown field", lines.get(k))
    if "n" not in d:
        raise ConfigError("n", "missing")
    mode = d.get("coloring", "uniform")
    path = d.get("coloring_path")
    if isinstance(mode, str) and mode.startswith("file:"):
        mode, path = "from_file", mode[5:]
    mode = {"bal-debiasio": "bal_debiasio"}.get(mode, mode)
    seed = d.get("seed", 0)
    cfg = ExperimentConfig(
        gnp=GnpParams(d["n"], d.get("p", 0.5), seed),
        coloring=ColoringSpec(mode=mode, r=d.get("r", 2), seed=seed if isinstance(seed, int) else 0, path=path),
        pipeline=d.get("pipeline", "full"),
        parts=d.get("parts"),
        approx=dict(d.get("approx") or {}),
        cascade=dict(d.get("cascade") or {}),
        trials=d.get("trials", 1),
        out=d.get("out"),
        jobs=d.get("jobs", 1),
        oracle_check=bool(d.get("oracle_check", False)),
    )
    try:
        cfg.validate()
    except ConfigError as exc:
        if exc.line is None and exc.field.split(".")[0] in lines:
            raise ConfigError(exc.field, str(exc).split(": ", 1)[1], lines[exc.field.split(".")[0]]) from None
        raise
    return cfg


def load_config(path: str) -> ExperimentConfig:
    """Read a JSON config; errors name the offending field and, when known, its line."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", exc.msg, exc.lineno) from None
    if not isinstance(d, dict):
        raise ConfigError("config", "top level must be a JSON object")
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        for k in d:
            if f'"{k}"' in line and k not in lines:
                lines[k] = lineno
    return config_from_dict(d, lines)


# ---------------------------------------------------------------------------
# graph files


def load_colored_graph(path: str) -> ColoredGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def save_colored_graph(CG: ColoredGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(CG))


# ---------------------------------------------------------------------------
# covering


def default_parts(n: int, r: int) -> tuple[int, bool]:
    s = (101 * r) ** 4
    return (n, True) if s > n else (s, False)


def budgets(r: int) -> dict:
    return {
        "approx": 3 * r * r,
        "small_set": small_set_budget(r),
        "global": (100.0 * r) ** 8 * math.log(r),
    }


def residual_cycles(CG: ColoredGraph, R: VertexSet) -> tuple[list[Cycle], VertexSet]:
    """Greedy monochromatic cycles, then edges, inside G[R]; returns what is still left."""
    verts = R.to_list()
    if len(verts) < 2:
        return [], R
    local = {v: j for j, v in enumerate(verts)}
    layers = {}
    for c in range(1, CG.r + 1):
        rows = []
        for v in verts:
            m = 0
            for u in iter_bits(CG.adj(v, c) & R.bits, CG.n):
                m |= 1 << local[u]
            rows.append(m)
        layers[c] = rows
    live = (1 << len(verts)) - 1
    out: list[Cycle] = []
    while True:
        best, best_c = None, 0
        for c in range(1, CG.r + 1):
            cyc = longest_back_edge_cycle(layers[c], live)
            if cyc is not None and (best is None or len(cyc) > len(best)):
                best, best_c = cyc, c
        if best is None:
            break
        out.append(Cycle(tuple(verts[j] for j in best), best_c))
        for j in best:
            live &= ~(1 << j)
    for a in iter_bits(live):
        if not (live >> a) & 1:
            continue
        for c in range(1, CG.r + 1):
            nb = layers[c][a] & live & ~(1 << a)
            if nb:
                b = lowest(nb)
                out.append(Cycle((verts[a], verts[b]), c))
                live &= ~((1 << a) | (1 << b))
                break
    return out, VertexSet(CG.n, [verts[j] for j in iter_bits(live)])


def split_parts(n: int, s: int, seed: int, trial: int) -> list[VertexSet]:
    perm = make_rng(seed, trial, PIPELINE, 1).permutation(n)
    return [VertexSet(n, sorted(part.tolist())) for part in np.array_split(perm, s)]


def cover_all(CG: ColoredGraph, cfg: ExperimentConfig, trial: int = 0) -> tuple[Cover, dict]:
    """Cover every vertex of CG by monochromatic cycles; returns the cover and stage statistics."""
    n, r = CG.n, CG.r
    if cfg.parts is None:
        s, capped = default_parts(n, r)
    else:
        s, capped = min(cfg.parts, n), cfg.parts > n
    p = edge_density(CG.base)
    approx_params = ApproxParams(r=r, **cfg.approx)
    seed = cfg.gnp.seed
    stats = {
        "parts": s,
        "parts_capped": capped,
        "approx_cycles": 0,
        "approx_uncovered": 0,
        "cascade_cycles": 0,
        "cascade_fallback": 0,
        "lift_attempts": 0,
        "lift_successes": 0,
        "residual_cycles": 0,
        "degenerate_cycles": 0,
    }
    details = []
    cycles: list[Cycle] = []
    leftover_bits = 0
    for j, W in enumerate(split_parts(n, s, seed, trial)):
        detail: dict = {"part": j, "size": len(W)}
        rem = W
        if cfg.pipeline in ("approx", "full") and len(W) > 0:
            ac = approx_cover_small_set(CG, W, approx_params)
            cycles += ac.cycles
            stats["approx_cycles"] += len(ac.cycles)
            rem = ac.uncovered
            stats["approx_uncovered"] += len(rem)
            detail["approx"] = {"cycles": len(ac.cycles), "uncovered": len(rem)}
        if cfg.pipeline in ("cascade", "full") and rem:
            opts = dict(cfg.cascade)
            opts.setdefault("seed", derive_seed(seed, trial, PIPELINE, 2, j) >> 1)
            cc = cover_small_set(CG, rem, SmallSetParams(**opts), W=W)
            proper = [c for c in cc.cycles if len(c.vertices) > 1]
            cycles += proper
            stats["cascade_cycles"] += len(proper)
            d = cc.diagnostics
            stats["cascade_fallback"] += d.get("fallback_vertices", 0)
            stats["lift_attempts"] += d.get("lift_attempts", 0)
            stats["lift_successes"] += d.get("lift_successes", 0)
            detail["cascade"] = {
                "cycles": len(proper),
                "fallback": d.get("fallback_vertices", 0),
                "params": d.get("params"),
                "cascade_edges": d.get("cascade_graph", {}).get("edges"),
            }
            rem = VertexSet(n, [c.vertices[0] for c in cc.cycles if len(c.vertices) == 1])
        leftover_bits |= rem.bits
        if len(details) < PART_DETAIL_LIMIT:
            details.append(detail)
    res, still = residual_cycles(CG, VertexSet.from_bits(n, leftover_bits))
    cycles += res
    stats["residual_cycles"] = len(res)
    cycles += [Cycle((v,)) for v in still]
    stats["degenerate_cycles"] = len(still)
    stats["part_details"] = details
    stats["edge_density"] = p
    return Cover(cycles, VertexSet.full(n), disjoint=False, diagnostics=stats), stats


# ---------------------------------------------------------------------------
# experiments


def _trial_graph(cfg: ExperimentConfig, trial: int) -> ColoredGraph:
    if cfg.coloring.mode == "from_file":
        return load_colored_graph(cfg.coloring.path)
    G = sample_gnp(cfg.gnp, stream=(trial,))
    CG, _ = apply_coloring(G, cfg.coloring, stream=(trial,))
    return CG


def run_trial(cfg: ExperimentConfig, trial: int) -> tuple[dict, float]:
    """One trial's deterministic record plus its wall time (kept out of the record)."""
    t0 = time.perf_counter()
    CG = _trial_graph(cfg, trial)
    cover, stats = cover_all(CG, cfg, trial)
    check = verify_cover(CG, cover)
    valid = check.valid and check.uncovered_count == 0
    r = CG.r
    b = budgets(r)
    size = len(cover.cycles)
    rec = {
        "trial": trial,
        "n": CG.n,
        "r": r,
        "edges": CG.base.num_edges,
        "cover_size": size,
        "uncovered": check.uncovered_count,
        "valid": valid,
        "violations": list(check.violations),
        "stages": stats,
        "budgets": b,
        "within_budget": {k: size <= v for k, v in b.items()},
    }
    if cfg.oracle_check and CG.n <= MAX_COVER_N:
        exact = min_mono_cycle_cover_exact(CG)
        rec["oracle"] = {"minimum": exact.size, "dominated": exact.size <= size}
        rec["valid"] = rec["valid"] and exact.size <= size
    return rec, time.perf_counter() - t0


def _trial_worker(args: tuple[dict, int]) -> tuple[dict, float]:
    cfg_dict, trial = args
    return run_trial(config_from_dict(cfg_dict), trial)


def _summary(values: list[float]) -> dict:
    a = np.asarray(values, dtype=float)
    q = np.quantile(a, [0.25, 0.5, 0.75])
    return {
        "mean": float(a.mean()),
        "min": float(a.min()),
        "max": float(a.max()),
        "q25": float(q[0]),
        "median": float(q[1]),
        "q75": float(q[2]),
    }


def aggregate(records: list[dict]) -> dict:
    keys = ["cover_size", "uncovered"]
    stage_keys = ["approx_cycles", "cascade_cycles", "residual_cycles", "degenerate_cycles", "cascade_fallback"]
    out = {k: _summary([rec[k] for rec in records]) for k in keys}
    for k in stage_keys:
        out[k] = _summary([rec["stages"][k] for rec in records])
    att = sum(rec["stages"]["lift_attempts"] for rec in records)
    suc = sum(rec["stages"]["lift_successes"] for rec in records)
    out["lift_success_rate"] = suc / att if att else None
    out["all_valid"] = all(rec["valid"] for rec in records)
    return out


@dataclass
class Report:
    config: dict
    trials: list[dict]
    aggregate: dict
    wall_times: list[float]

    @property
    def all_valid(self) -> bool:
        return self.aggregate["all_valid"]

    def to_json(self) -> str:
        body = {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "trials": self.trials,
            "aggregate": self.aggregate,
        }
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        c = self.config
        for rec in self.trials:
            s = rec["stages"]
            w.writerow(
                [
                    SCHEMA_VERSION,
                    rec["trial"],
                    rec["n"],
                    c["p"],
                    rec["r"],
                    c["seed"],
                    c["pipeline"],
                    s["parts"],
                    rec["edges"],
                    rec["cover_size"],
                    s["approx_cycles"],
                    s["cascade_cycles"],
                    s["residual_cycles"],
                    s["degenerate_cycles"],
                    rec["uncovered"],
                    int(rec["valid"]),
                    rec["budgets"]["approx"],
                    f"{rec['budgets']['small_set']:.6f}",
                    f"{rec['budgets']['global']:.6e}",
                ]
            )
        return buf.getvalue()

    def metadata(self, jobs: int) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "jobs": jobs,
            "wall_times": self.wall_times,
        }


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Run all trials (in parallel up to cfg.jobs) and write report files when cfg.out is set.

    Trial i draws only from streams keyed by i, and results are merged in
    trial order, so the report does not depend on the job count.
    """
    cfg.validate()
    if cfg.jobs > 1 and cfg.trials > 1:
        args = [(cfg.to_dict(), t) for t in range(cfg.trials)]
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, cfg.trials)) as pool:
            results = list(pool.map(_trial_worker, args))
    else:
        results = [run_trial(cfg, t) for t in range(cfg.trials)]
    records = [rec for rec, _ in results]
    report = Report(cfg.report_dict(), records, aggregate(records), [w for _, w in results])
    if cfg.out:
        write_report(report, cfg.out, cfg.jobs)
    return report


def write_report(report: Report, out_dir: str, jobs: int = 1) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    with open(os.path.join(out_dir, "summary.csv"), "w", encoding="utf-8") as fh:
        fh.write(report.summary_csv())
    with open(os.path.join(out_dir, "metadata.json"), "w", encoding="utf-8") as fh:
        json.dump(report.metadata(jobs), fh, indent=2, sort_keys=True)
        fh.write("\n")


__all__ = [
    "ConfigError",
    "EdgeListParseError",
    "ExperimentConfig",
    "Report",
    "config_from_dict",
    "cover_all",
    "load_colored_graph",
    "load_config",
    "run_experiment",
    "run_trial",
    "save_colored_graph",
]
