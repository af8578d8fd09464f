"""Experiment harness: generate, learn a metric, cluster, measure convergence.

A config names a generator, a metric method, k-means settings, sample sizes,
and a trial count.  Each (size, trial) cell draws its own cloud from a stream
keyed by (master seed, trial, size), so results are reproducible cell by cell
and independent of execution order; trials run in a thread pool capped by
MM_THREADS, and rows are assembled in sorted order either way.

Deviations are measured against a reference family: the largest size's
solution within the same trial ("self"), or explicit coordinates when the
population solution is known in closed form.  Self-reference deviations are
convergence diagnostics, never ground truth.
"""
from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .errors import InvalidArgumentError, MmError
from .io import read_cloud_csv
from .samplers import covering_radius, derived_seed, sample, true_distance_matrix
from .space import FiniteMetricMeasureSpace, k_means_exact, k_means_pam, one_sided_center_deviation
from .voronoi import cluster_deviation, voronoi_cells
from .wasserstein import build_ground_metric, worker_count

CSV_COLUMNS = [
    "n",
    "trial",
    "status",
    "objective",
    "n_minimizers",
    "centers",
    "center_deviation",
    "cluster_deviation",
    "metric_defect",
    "covering_radius",
    "error",
]

# (method, generator) pairs whose learned matrix targets a closed-form metric
# with no unknown scale factor; only these get a metric defect recorded.
_DEFECT_PAIRS = {
    ("euclid", "interval"),
    ("euclid", "gaussian"),
    ("euclid", "mixture"),
    ("isomap", "circle"),
    ("isomap", "torus"),
    ("isomap", "interval"),
}

_COVERING_GENERATORS = ("interval", "circle", "torus")


@dataclass
class ExperimentConfig:
    generator: str
    generator_params: dict = field(default_factory=dict)
    method: str = "euclid"
    method_params: dict = field(default_factory=dict)
    k: int = 1
    p: float = 2.0
    solver: str = "exact"
    restarts: int = 10
    sizes: list = field(default_factory=lambda: [100])
    trials: int = 1
    seed: int = 0
    reference: str = "self"
    reference_centers: np.ndarray | None = None

    def __post_init__(self):
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise InvalidArgumentError("sizes must be positive")
        if sorted(self.sizes) != list(self.sizes) or len(set(self.sizes)) != len(self.sizes):
            raise InvalidArgumentError("sizes must be strictly ascending")
        if self.trials < 1:
            raise InvalidArgumentError("trials must be >= 1")
        if self.k < 1:
            raise InvalidArgumentError("k must be >= 1")
        if self.solver not in ("exact", "pam"):
            raise InvalidArgumentError("solver must be 'exact' or 'pam'")
        if self.reference != "self" and self.reference_centers is None:
            raise InvalidArgumentError(
                "reference must be 'self' or come with explicit reference_centers"
            )
        if self.generator == "file":
            path = self.generator_params.get("path")
            if not path or not Path(path).exists():
                raise InvalidArgumentError(f"file generator needs an existing path, got {path!r}")

    def to_dict(self) -> dict:
        doc = {
            "generator": self.generator,
            "generator_params": {k: _jsonable(v) for k, v in sorted(self.generator_params.items())},
            "method": self.method,
            "method_params": {k: _jsonable(v) for k, v in sorted(self.method_params.items())},
            "k": self.k,
            "p": self.p,
            "solver": self.solver,
            "restarts": self.restarts,
            "sizes": list(self.sizes),
            "trials": self.trials,
            "seed": self.seed,
            "reference": self.reference,
        }
        if self.reference_centers is not None:
            doc["reference_centers"] = [list(map(float, r)) for r in self.reference_centers]
        return doc

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def _parse_rows(text: str) -> np.ndarray:
    rows = [r.strip() for r in text.split(";") if r.strip()]
    return np.asarray([[float(v) for v in r.split()] for r in rows], dtype=np.float64)


def load_config(path) -> ExperimentConfig:
    """Read a config from sectioned key-value text (INI)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise InvalidArgumentError(f"cannot read config {path!r}")
    data = parser["data"] if parser.has_section("data") else {}
    metric = parser["metric"] if parser.has_section("metric") else {}
    kmeans = parser["kmeans"] if parser.has_section("kmeans") else {}
    run = parser["run"] if parser.has_section("run") else {}

    gparams = {}
    if "dim" in data:
        gparams["dim"] = int(data["dim"])
    if "centers" in data:
        gparams["centers"] = _parse_rows(data["centers"])
    if "scales" in data:
        gparams["scales"] = np.asarray([float(v) for v in data["scales"].split()])
    if "path" in data:
        gparams["path"] = data["path"]

    mparams = {}
    for key in ("alpha", "eps", "sigma", "t"):
        if key in metric:
            mparams[key] = float(metric[key])
    for key in ("embed_k", "knn"):
        if key in metric:
            mparams[key] = int(metric[key])

    reference = run.get("reference", "self").strip()
    ref_centers = None
    if reference != "self":
        ref_centers = _parse_rows(reference)
        reference = "explicit"

    try:
        return ExperimentConfig(
            generator=data.get("generator", "interval"),
            generator_params=gparams,
            method=metric.get("method", "euclid"),
            method_params=mparams,
            k=int(kmeans.get("k", 1)),
            p=float(kmeans.get("p", 2.0)),
            solver=kmeans.get("solver", "exact"),
            restarts=int(kmeans.get("restarts", 10)),
            sizes=[int(v) for v in run.get("sizes", "100").split()],
            trials=int(run.get("trials", 1)),
            seed=int(run.get("seed", 0)),
            reference=reference,
            reference_centers=ref_centers,
        )
    except ValueError as exc:
        raise InvalidArgumentError(f"bad config value: {exc}")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    summary: dict


def _trial_cloud(config: ExperimentConfig, n: int, trial: int) -> PointCloud:
    if config.generator == "file":
        cloud = read_cloud_csv(config.generator_params["path"])
        if n > cloud.n:
            raise InvalidArgumentError(f"file has {cloud.n} rows, requested n={n}")
        return PointCloud(cloud.points[:n], cloud.intrinsic_dim)
    seed = derived_seed(config.seed, "trial", trial, "n", n)
    return sample(config.generator, n, seed, **config.generator_params)


def _learned_matrix(config: ExperimentConfig, cloud: PointCloud) -> np.ndarray:
    return build_ground_metric(cloud, config.method, config.method_params)


def _solve(config: ExperimentConfig, space: FiniteMetricMeasureSpace, trial: int):
    if config.solver == "exact":
        return k_means_exact(space, config.k, config.p)
    return k_means_pam(
        space,
        config.k,
        config.p,
        restarts=config.restarts,
        seed=derived_seed(config.seed, "pam", trial),
    )


def _euclid(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def _run_trial(config: ExperimentConfig, trial: int):
    cells = {}
    for n in config.sizes:
        row = {
            "n": n,
            "trial": trial,
            "status": "ok",
            "objective": math.nan,
            "n_minimizers": 0,
            "centers": "",
            "center_deviation": math.nan,
            "cluster_deviation": math.nan,
            "metric_defect": math.nan,
            "covering_radius": math.nan,
            "error": "",
        }
        try:
            cloud = _trial_cloud(config, n, trial)
            matrix = _learned_matrix(config, cloud)
            space = FiniteMetricMeasureSpace.uniform([str(i) for i in range(n)], matrix)
            sol = _solve(config, space, trial)
            center_sets = [
                [cloud.points[i] for i in m.indices] for m in sol.minimizers
            ]
            cell_sets = []
            for m in sol.minimizers:
                part = voronoi_cells(space, m)
                for members in part.cells.values():
                    cell_sets.append([cloud.points[i] for i in members])
            row["objective"] = sol.objective
            row["n_minimizers"] = len(sol.minimizers)
            row["centers"] = "|".join(
                " ".join(repr(float(v)) for v in pt) for pt in center_sets[0]
            )
            if (config.method, config.generator) in _DEFECT_PAIRS:
                d_true = true_distance_matrix(config.generator, cloud)
                row["metric_defect"] = float(np.abs(matrix - d_true).max())
            if config.generator in _COVERING_GENERATORS:
                row["covering_radius"] = covering_radius(config.generator, cloud)
            cells[n] = (row, center_sets, cell_sets)
        except MmError as exc:
            row["status"] = "error"
            row["error"] = f"{type(exc).__name__}: {exc}"
            cells[n] = (row, None, None)

    # reference family: explicit centers, or the largest size that succeeded
    ref_centers = None
    ref_cells = None
    if config.reference == "explicit":
        ref_centers = [[pt for pt in config.reference_centers]]
        largest_ok = next(
            (n for n in reversed(config.sizes) if cells[n][1] is not None), None
        )
        if largest_ok is not None:
            cloud = _trial_cloud(config, largest_ok, trial)
            assign_d = np.stack(
                [np.linalg.norm(cloud.points - c[None, :], axis=1) for c in config.reference_centers],
                axis=1,
            )
            dmin = assign_d.min(axis=1)
            ref_cells = [
                [cloud.points[i] for i in np.flatnonzero(assign_d[:, j] <= dmin)]
                for j in range(assign_d.shape[1])
            ]
    else:
        largest_ok = next(
            (n for n in reversed(config.sizes) if cells[n][1] is not None), None
        )
        if largest_ok is not None:
            ref_centers = cells[largest_ok][1]
            ref_cells = cells[largest_ok][2]

    rows = []
    for n in config.sizes:
        row, center_sets, cell_sets = cells[n]
        if row["status"] == "ok" and ref_centers:
            row["center_deviation"] = one_sided_center_deviation(
                center_sets, ref_centers, _euclid
            )
            if ref_cells:
                row["cluster_deviation"] = cluster_deviation(cell_sets, ref_cells, _euclid)
        rows.append(row)
    return rows


def run_experiment(config: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Run all (size, trial) cells, optionally writing results.csv + summary.json.

    Per-cell errors are recorded in their row and the run continues; the
    summary counts them.  Output is byte-deterministic for a fixed config,
    regardless of MM_THREADS.
    """
    trials = list(range(config.trials))
    workers = min(worker_count(), max(1, len(trials)))
    if workers > 1 and len(trials) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(lambda tr: _run_trial(config, tr), trials))
    else:
        per_trial = [_run_trial(config, tr) for tr in trials]

    rows = [row for batch in per_trial for row in batch]
    rows.sort(key=lambda r: (r["n"], r["trial"]))
    for row in rows:
        if set(row) != set(CSV_COLUMNS):
            raise MmError(f"row schema drift: {sorted(row)}")

    failed = sum(1 for r in rows if r["status"] != "ok")
    summary = {
        "config_sha256": config.digest(),
        "rows": len(rows),
        "failed": failed,
        "per_n": {},
    }
    for n in config.sizes:
        ok = [r for r in rows if r["n"] == n and r["status"] == "ok"]
        entry = {"ok": len(ok), "failed": sum(1 for r in rows if r["n"] == n) - len(ok)}
        for col in ("objective", "center_deviation", "cluster_deviation", "metric_defect", "covering_radius"):
            vals = [r[col] for r in ok if not math.isnan(r[col])]
            if vals:
                entry[f"median_{col}"] = float(np.median(vals))
        summary["per_n"][str(n)] = entry

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "results.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in rows:
                formatted = dict(row)
                for col in ("objective", "center_deviation", "cluster_deviation", "metric_defect", "covering_radius"):
                    formatted[col] = "" if math.isnan(row[col]) else repr(float(row[col]))
                writer.writerow(formatted)
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return ExperimentResult(config=config, rows=rows, summary=summary)
