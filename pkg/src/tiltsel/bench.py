"""Benchmark harness: seeded replicates, method sweep, deterministic outputs.

A benchmark is fully determined by its config plus master seed. Replicate
r derives its seed from the master seed through spawn key (r,), workers
own a replicate end-to-end, and results are reduced in replicate order, so
summary outputs are byte-identical across re-runs and worker counts. Wall
times live only in the manifest, never in the hashed outputs.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .baselines import (
    forward_regression,
    forward_selection,
    marginal_screening_path,
    pc_simple,
)
from .metrics import SelectionReport, score, score_selection, summary_rows
from .simulate import (
    PRNG_NAME,
    ModelKind,
    SimSpec,
    generate_replicate,
    threshold_seed,
)
from .tcs import Rescaling, TcsConfig, fit_final_coefficients, run_tcs
from .thresholding import estimate_threshold

THREADS_ENV_VAR = "TILTSEL_THREADS"

KNOWN_METHODS = ("tcs-r1", "tcs-r2", "fs", "fr", "marginal", "pcsimple")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Declarative description of one benchmark run."""

    model: str
    n: int
    p: int
    replicates: int
    master_seed: int
    output_dir: str
    methods: tuple[str, ...] = ("tcs-r1", "tcs-r2", "fr", "fs")
    sparsity: int = 10
    phi: float | None = None
    r_squared: float | None = None
    m_max: int | None = None
    pi: float | str = "auto"
    pi_scale: tuple[float, ...] = (1.0,)
    nu_star: float | None = None
    alpha: float = 0.05
    threads: int | str = "auto"

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        unknown = [m for m in self.methods if m not in KNOWN_METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; known: {list(KNOWN_METHODS)}")
        ModelKind(self.model)

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkConfig":
        data = dict(data)
        for key in ("methods", "pi_scale"):
            if key in data and data[key] is not None:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass
class BenchmarkResult:
    config: BenchmarkConfig
    reports: list[SelectionReport] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)
    replicate_wall_times: list[float] = field(default_factory=list)
    wall_time_s: float = 0.0
    status: str = "OK"
    error: str | None = None


def resolve_threads(configured: int | str) -> int:
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        return max(1, int(env))
    if configured == "auto" or configured is None:
        return max(1, min(4, os.cpu_count() or 1))
    return max(1, int(configured))


def replicate_seed(master_seed: int, r: int) -> int:
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(r,))
    return int(seq.generate_state(1, np.uint64)[0])


def _method_label(method: str, scale: float) -> str:
    return method if scale == 1.0 else f"{method}@x{scale:g}"


def run_replicate(cfg: BenchmarkConfig, r: int) -> tuple[list[SelectionReport], list[dict]]:
    """Generate one data set and run every configured method on it."""
    seed = replicate_seed(cfg.master_seed, r)
    spec = SimSpec(
        model=cfg.model,
        n=cfg.n,
        p=cfg.p,
        sparsity=cfg.sparsity,
        phi=cfg.phi,
        r_squared=cfg.r_squared,
        replicate_seed=seed,
    )
    _, X, y, truth = generate_replicate(spec)

    needs_auto = cfg.pi == "auto" and any(m.startswith("tcs") for m in cfg.methods)
    if needs_auto:
        pi_base = estimate_threshold(X, seed=threshold_seed(seed), nu_star=cfg.nu_star).pi_hat
    elif cfg.pi == "auto":
        pi_base = 1.0
    else:
        pi_base = float(cfg.pi)

    reports: list[SelectionReport] = []
    records: list[dict] = []

    def record(report: SelectionReport, final_model, pi: float | None, n_steps: int):
        reports.append(report)
        records.append(
            {
                "replicate": r,
                "method": report.method,
                "fp": report.fp,
                "fn": report.fn_,
                "l2_sq": report.l2_sq,
                "final_model": sorted(int(j) for j in final_model),
                "n_steps": n_steps,
                "pi": pi,
            }
        )

    for method in cfg.methods:
        if method.startswith("tcs"):
            rescaling = Rescaling.R1 if method.endswith("r1") else Rescaling.R2
            for scale in cfg.pi_scale:
                pi_run = min(pi_base * float(scale), 1.0)
                path = run_tcs(
                    X, y, TcsConfig(pi=pi_run, rescaling=rescaling, m_max=cfg.m_max)
                )
                rep = score(truth, path, method=_method_label(method, scale), replicate=r)
                record(rep, path.final_model, pi_run, len(path.steps))
            continue
        if method == "pcsimple":
            selected = pc_simple(X, y, alpha=cfg.alpha)
            coefficients = fit_final_coefficients(X, y, selected)
            rep = score_selection(
                truth, selected, coefficients, prefixes=[selected], method=method, replicate=r
            )
            record(rep, selected, None, 0)
            continue
        if method == "fr":
            path = forward_regression(X, y, cfg.m_max)
        elif method == "fs":
            path = forward_selection(X, y, cfg.m_max)
        elif method == "marginal":
            path = marginal_screening_path(X, y, cfg.m_max)
        else:  # pragma: no cover - guarded by config validation
            raise ValueError(f"unknown method {method}")
        rep = score(truth, path, method=method, replicate=r)
        record(rep, path.final_model, None, len(path.steps))
    return reports, records


def run_benchmark(cfg: BenchmarkConfig) -> BenchmarkResult:
    """Run all replicates on a worker pool; reduce in replicate order."""
    result = BenchmarkResult(config=cfg)
    threads = resolve_threads(cfg.threads)
    started = time.perf_counter()

    def worker(r: int):
        t0 = time.perf_counter()
        reports, records = run_replicate(cfg, r)
        return reports, records, time.perf_counter() - t0

    try:
        if threads == 1:
            outcomes = [worker(r) for r in range(cfg.replicates)]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(worker, range(cfg.replicates)))
        for reports, records, elapsed in outcomes:
            result.reports.extend(reports)
            result.records.extend(records)
            result.replicate_wall_times.append(elapsed)
    except Exception as exc:  # partial results are still flushed by the writer
        result.status = "FAILED"
        result.error = f"{type(exc).__name__}: {exc}"
    result.wall_time_s = time.perf_counter() - started
    return result


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_summary_csv(path: Path, reports: Sequence[SelectionReport]) -> None:
    rows = summary_rows(reports) if reports else []
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "replicates", "mean_fp", "mean_fn", "mean_fp_plus_fn", "mean_l2_sq"]
        )
        for row in rows:
            writer.writerow([_format_value(row[k]) for k in (
                "method", "replicates", "mean_fp", "mean_fn", "mean_fp_plus_fn", "mean_l2_sq"
            )])


def write_roc_csv(path: Path, reports: Sequence[SelectionReport]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "replicate", "step", "fpr", "tpr"])
        for rep in reports:
            for step, (fpr, tpr) in enumerate(rep.roc_points):
                writer.writerow(
                    [rep.method, rep.replicate, step, repr(fpr), repr(tpr)]
                )


def write_outputs(result: BenchmarkResult, output_dir: str | Path) -> list[Path]:
    """Flush summary.csv, roc.csv, runs.jsonl, and manifest.json."""
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = outdir / "summary.csv"
    roc = outdir / "roc.csv"
    runs = outdir / "runs.jsonl"
    manifest = outdir / "manifest.json"
    write_summary_csv(summary, result.reports)
    write_roc_csv(roc, result.reports)
    with open(runs, "w") as fh:
        for record in result.records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    manifest_data = {
        "status": result.status,
        "error": result.error,
        "config": asdict(result.config),
        "prng": PRNG_NAME,
        "seed_scheme": "replicate r uses SeedSequence(master_seed, spawn_key=(r,))",
        "version": __version__,
        "threads": resolve_threads(result.config.threads),
        "wall_time_s": result.wall_time_s,
        "replicate_wall_times_s": result.replicate_wall_times,
    }
    with open(manifest, "w") as fh:
        json.dump(manifest_data, fh, indent=2, default=list)
        fh.write("\n")
    return [summary, roc, runs, manifest]
