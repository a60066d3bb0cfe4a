"""Experiment runner: dataset generation, single-method selection runs,
multi-method benchmarks with repetitions, and concentration reports.

Everything is driven by an :class:`ExperimentConfig`; a (config, seed)
pair maps to byte-identical report files. Per-repetition work derives
its random streams from (base seed + repetition index), so repetitions
are independent tasks and subsample-level parallelism inside a
repetition cannot change any result.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import linalg, selectors, stability, synth
from .errors import ConfigError, GlstarsError
from .glasso import (GlassoConfig, edge_set, glasso_path, lambda_max,
                     make_grid)
from .stability import SelectionResult, derive_seed

KNOWN_METHODS = ("stars", "kcv", "bic", "aic", "oracle")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a benchmark / generation run needs.

    Notes on defaults: subsample size b falls back to floor(10*sqrt(n));
    the grid is grid_size log-spaced penalties spanning
    [ratio * lam_max, lam_max] of the full-sample covariance.
    """

    kind: str = "hub"
    p: int = 100
    n: int = 400
    rho: float | None = None  # generator edge weight; None = generator default
    s: int = synth.DEFAULT_HUB_GROUP_SIZE  # hub group size
    methods: tuple = KNOWN_METHODS
    grid_size: int = 30
    grid_ratio: float = 0.05
    num_subsamples: int = stability.DEFAULT_NUM_SUBSAMPLES
    b_override: int | None = None
    beta: float = stability.DEFAULT_BETA
    folds: int = selectors.DEFAULT_FOLDS
    repetitions: int = 20
    seed: int = 0
    penalize_diagonal: bool = True
    refit_on_full: bool = False
    n_jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        """Full validation: generator fields plus run fields."""
        if self.kind not in ("hub", "neighborhood"):
            raise ConfigError(f"kind must be hub or neighborhood, got {self.kind!r}")
        if self.kind == "hub" and not 2 <= self.s < self.p:
            raise ConfigError(f"hub group size must satisfy 2 <= s < p, got s={self.s}")
        if self.rho is not None and not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must be in (0, 1), got {self.rho}")
        return self.validate_run()

    def validate_run(self) -> "ExperimentConfig":
        """Validation of the fields a selection run on existing data uses."""
        if self.p < 2:
            raise ConfigError(f"p must be >= 2, got {self.p}")
        if self.n < 4:
            raise ConfigError(f"n must be >= 4, got {self.n}")
        unknown = set(self.methods) - set(KNOWN_METHODS)
        if unknown:
            raise ConfigError(f"unknown methods: {sorted(unknown)}")
        if self.grid_size < 2:
            raise ConfigError("grid_size must be >= 2")
        if not 0.0 < self.grid_ratio < 1.0:
            raise ConfigError("grid_ratio must be in (0, 1)")
        if self.num_subsamples < 1:
            raise ConfigError("num_subsamples must be >= 1")
        if self.b_override is not None and not 1 < self.b_override < self.n:
            raise ConfigError(f"b_override must be in (1, n), got {self.b_override}")
        if not 0.0 < self.beta < 0.5:
            raise ConfigError(f"beta must be in (0, 0.5), got {self.beta}")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        return self

    def glasso_config(self) -> GlassoConfig:
        return GlassoConfig(penalize_diagonal=self.penalize_diagonal)

    def truth_params(self) -> dict:
        if self.kind == "hub":
            out: dict = {"s": self.s}
        else:
            out = {}
        if self.rho is not None:
            out["rho"] = self.rho
        return out

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        known = {f for f in ExperimentConfig.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "methods" in raw:
            raw = dict(raw, methods=tuple(raw["methods"]))
        try:
            return ExperimentConfig(**raw).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def make_dataset(config: ExperimentConfig, rep: int = 0):
    """(GroundTruth, data matrix) for one repetition; seed = base + rep."""
    rep_seed = config.seed + rep
    truth = synth.generate(config.kind, config.p, seed=rep_seed,
                           **config.truth_params())
    data = linalg.sample_gaussian(truth.sigma, config.n,
                                  seed=derive_seed(rep_seed, 1))
    return truth, data


def _fresh_subsample_rows(n: int, b: int, rep_seed: int) -> np.ndarray:
    rng = np.random.default_rng(derive_seed(rep_seed, 3))
    return rng.choice(n, size=b, replace=False)


def run_methods(data: np.ndarray, config: ExperimentConfig, rep_seed: int,
                truth: synth.GroundTruth | None = None) -> dict[str, SelectionResult]:
    """Run every requested selection method on one dataset.

    The oracle and the StARS refit share one fresh subsample of size b;
    AIC/BIC/K-CV graphs come from the full-data path. Results carry a
    'seconds' diagnostic with the method's wall time.
    """
    cfg = config.glasso_config()
    n = data.shape[0]
    sigma_full = linalg.sample_covariance(data)
    grid = make_grid(lambda_max(sigma_full), config.grid_size, config.grid_ratio)
    b = (config.b_override if config.b_override is not None
         else stability.default_block_size(n))

    results: dict[str, SelectionResult] = {}
    methods = config.methods

    full_path = None
    if {"aic", "bic", "kcv"} & set(methods):
        full_path = glasso_path(sigma_full, grid, cfg)

    fresh_path = None
    if {"stars", "oracle"} & set(methods) and not config.refit_on_full:
        rows = _fresh_subsample_rows(n, b, rep_seed)
        fresh_path = glasso_path(linalg.sample_covariance(data[rows]), grid, cfg)

    if "stars" in methods:
        t0 = time.perf_counter()
        plan = stability.make_plan(n, num_subsamples=config.num_subsamples,
                                   seed=derive_seed(rep_seed, 2), b_override=b)
        theta = stability.edge_frequencies(data, plan, grid, cfg,
                                           n_jobs=config.n_jobs)
        profile = stability.instability_profile(theta, grid)
        if config.refit_on_full:
            refit_path = full_path if full_path is not None else glasso_path(
                sigma_full, grid, cfg)
        else:
            refit_path = fresh_path
        refit_edges = np.stack([edge_set(est) for est in refit_path])
        res = stability.stars_select(profile, config.beta, refit_edges)
        res.diagnostics["b"] = plan.b
        res.diagnostics["seconds"] = time.perf_counter() - t0
        results["stars"] = res

    if "oracle" in methods:
        if truth is None:
            raise ConfigError("oracle method needs a synthetic ground truth")
        t0 = time.perf_counter()
        path = fresh_path if fresh_path is not None else glasso_path(
            sigma_full, grid, cfg)
        res = selectors.oracle_select(path, truth.edges, grid)
        res.diagnostics["seconds"] = time.perf_counter() - t0
        results["oracle"] = res

    if "aic" in methods:
        t0 = time.perf_counter()
        res = selectors.aic_select(full_path, sigma_full, grid, n)
        res.diagnostics["seconds"] = time.perf_counter() - t0
        results["aic"] = res

    if "bic" in methods:
        t0 = time.perf_counter()
        res = selectors.bic_select(full_path, sigma_full, grid, n)
        res.diagnostics["seconds"] = time.perf_counter() - t0
        results["bic"] = res

    if "kcv" in methods:
        t0 = time.perf_counter()
        res = selectors.kcv_select(data, grid, config.folds, cfg,
                                   seed=derive_seed(rep_seed, 4),
                                   full_path=full_path)
        res.diagnostics["seconds"] = time.perf_counter() - t0
        results["kcv"] = res

    return results


@dataclass(frozen=True)
class BenchmarkRow:
    method: str
    rep: int
    precision: float
    recall: float
    f1: float
    capital_lambda: float
    edges: int
    true_edge_recovery: bool  # every true edge present in the estimate
    seconds: float


@dataclass(frozen=True)
class BenchmarkReport:
    config: ExperimentConfig
    rows: list
    failures: list  # (method, rep, message) triples
    aggregates: dict  # method -> {metric: {mean, sd, stderr}}


def _aggregate(rows: list[BenchmarkRow]) -> dict:
    out: dict = {}
    by_method: dict[str, list[BenchmarkRow]] = {}
    for row in rows:
        by_method.setdefault(row.method, []).append(row)
    for method, group in sorted(by_method.items()):
        stats = {}
        for metric in ("precision", "recall", "f1"):
            vals = np.array([getattr(r, metric) for r in group])
            sd = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
            stats[metric] = {
                "mean": float(vals.mean()),
                "sd": sd,
                "stderr": sd / math.sqrt(len(vals)),
            }
        stats["true_edge_recovery_rate"] = float(
            np.mean([r.true_edge_recovery for r in group]))
        stats["count"] = len(group)
        out[method] = stats
    return out


def run_benchmark(config: ExperimentConfig,
                  progress=None) -> BenchmarkReport:
    """Repeat the full method comparison on fresh synthetic datasets.

    Per repetition: new ground truth and data (seed = base + rep), every
    requested method, precision/recall/F1 against the truth. Failures
    are recorded per (method, rep) and excluded from the aggregates.
    """
    config.validate()
    rows: list[BenchmarkRow] = []
    failures: list[tuple] = []
    for rep in range(config.repetitions):
        rep_seed = config.seed + rep
        truth, data = make_dataset(config, rep)
        try:
            results = run_methods(data, config, rep_seed, truth)
        except GlstarsError as exc:
            failures.extend((m, rep, repr(exc)) for m in config.methods)
            continue
        for method, res in results.items():
            precision, recall, f1 = synth.metrics(res.edge_set, truth.edges)
            rows.append(BenchmarkRow(
                method=method,
                rep=rep,
                precision=precision,
                recall=recall,
                f1=f1,
                capital_lambda=res.chosen_capital_lambda,
                edges=int(np.count_nonzero(res.edge_set)) // 2,
                true_edge_recovery=bool(np.all(res.edge_set[truth.edges])),
                seconds=float(res.diagnostics.get("seconds", 0.0)),
            ))
        if progress is not None:
            progress(rep)
    return BenchmarkReport(config=config, rows=rows, failures=failures,
                           aggregates=_aggregate(rows))


# ---------------------------------------------------------------------------
# file writers


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_data_csv(data: np.ndarray, path: Path) -> None:
    p = data.shape[1]
    with open(path, "w") as fh:
        fh.write(",".join(f"x{j}" for j in range(p)) + "\n")
        for row in data:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_data_csv(path: Path) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"{path}: not a numeric CSV matrix ({exc})") from exc
    if not np.all(np.isfinite(data)):
        raise ConfigError(f"{path}: contains non-finite values")
    return data


def write_edges_tsv(edges: np.ndarray, path: Path) -> None:
    with open(path, "w") as fh:
        for i, j in synth.edge_pairs(edges):
            fh.write(f"{i}\t{j}\n")


def write_dot(edges: np.ndarray, path: Path) -> None:
    lines = ["graph estimate {"]
    lines += [f"  x{i} -- x{j};" for i, j in synth.edge_pairs(edges)]
    lines.append("}")
    path.write_text("\n".join(lines) + "\n")


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_generate(config: ExperimentConfig, out_dir: Path) -> dict:
    """Write a ground-truth directory plus data.csv; returns a manifest."""
    config.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    truth, data = make_dataset(config, rep=0)
    synth.save_truth(truth, out_dir)
    write_data_csv(data, out_dir / "data.csv")
    manifest = {
        "kind": truth.kind,
        "params": truth.params,
        "n": config.n,
        "p": config.p,
        "true_edges": int(np.count_nonzero(truth.edges)) // 2,
        "files": ["omega.csv", "edges.tsv", "meta.json", "data.csv"],
    }
    _json_dump(manifest, out_dir / "manifest.json")
    return manifest


def selection_to_dict(res: SelectionResult) -> dict:
    out = {
        "method": res.method,
        "chosen_index": res.chosen_index,
        "chosen_capital_lambda": res.chosen_capital_lambda,
        "chosen_lambda": 1.0 / res.chosen_capital_lambda,
        "edges": synth.edge_pairs(res.edge_set),
        "diagnostics": {k: v for k, v in sorted(res.diagnostics.items())
                        if k != "seconds"},
    }
    return out


def cmd_select(data_file: Path, method: str, config: ExperimentConfig,
               out_dir: Path, dot: bool = False) -> dict:
    """Run one selection method on a CSV data matrix; write JSON + edges."""
    if method not in KNOWN_METHODS:
        raise ConfigError(f"unknown method {method!r}")
    if method == "oracle":
        raise ConfigError("oracle needs a synthetic truth; use benchmark")
    data = read_data_csv(Path(data_file))
    config = replace(config, n=data.shape[0], p=data.shape[1],
                     methods=(method,)).validate_run()
    results = run_methods(data, config, rep_seed=config.seed, truth=None)
    res = results[method]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = selection_to_dict(res)
    _json_dump(payload, out_dir / "selection.json")
    write_edges_tsv(res.edge_set, out_dir / "edges.tsv")
    if dot:
        write_dot(res.edge_set, out_dir / "graph.dot")
    return payload


def write_benchmark(report: BenchmarkReport, out_dir: Path) -> None:
    """per_rep.csv, aggregates.csv, report.json, timing.csv.

    Everything except timing.csv is byte-identical across reruns of the
    same (config, seed); wall times are inherently not.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "per_rep.csv", "w") as fh:
        fh.write("method,rep,precision,recall,f1,capital_lambda,edges,"
                 "true_edge_recovery\n")
        for r in report.rows:
            fh.write(f"{r.method},{r.rep},{_fmt(r.precision)},{_fmt(r.recall)},"
                     f"{_fmt(r.f1)},{_fmt(r.capital_lambda)},{r.edges},"
                     f"{int(r.true_edge_recovery)}\n")
    with open(out_dir / "timing.csv", "w") as fh:
        fh.write("method,rep,seconds\n")
        for r in report.rows:
            fh.write(f"{r.method},{r.rep},{_fmt(r.seconds)}\n")
    with open(out_dir / "aggregates.csv", "w") as fh:
        fh.write("method,metric,mean,sd,stderr\n")
        for method, stats in sorted(report.aggregates.items()):
            for metric in ("precision", "recall", "f1"):
                s = stats[metric]
                fh.write(f"{method},{metric},{_fmt(s['mean'])},{_fmt(s['sd'])},"
                         f"{_fmt(s['stderr'])}\n")
    rows = []
    for r in report.rows:
        row = asdict(r)
        row.pop("seconds")  # timing lives in timing.csv only
        rows.append(row)
    payload = {
        "config": asdict(report.config),
        "aggregates": report.aggregates,
        "failures": [list(f) for f in report.failures],
        "rows": rows,
    }
    _json_dump(payload, out_dir / "report.json")


def cmd_benchmark(config: ExperimentConfig, out_dir: Path,
                  progress=None) -> BenchmarkReport:
    report = run_benchmark(config, progress=progress)
    write_benchmark(report, Path(out_dir))
    return report


def write_concentration(report: stability.ConcentrationReport,
                        out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "concentration.csv", "w") as fh:
        fh.write("n,b,p,grid_size,num_subsamples,trials,delta,bound,"
                 "median_deviation,max_deviation,violation_fraction\n")
        for c in report.cells:
            fh.write(f"{c.n},{c.b},{c.p},{c.grid_size},{c.num_subsamples},"
                     f"{c.trials},{_fmt(c.delta)},{_fmt(c.bound)},"
                     f"{_fmt(c.median_deviation)},{_fmt(c.max_deviation)},"
                     f"{_fmt(c.violation_fraction)}\n")
    _json_dump({"kind": report.kind, "p": report.p,
                "cells": [asdict(c) for c in report.cells]},
               out_dir / "concentration.json")


def cmd_concentration(out_dir: Path, **kwargs) -> stability.ConcentrationReport:
    report = stability.check_concentration(**kwargs)
    write_concentration(report, Path(out_dir))
    return report
