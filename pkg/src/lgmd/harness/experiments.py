"""Experiment pipelines: denoising, completion and clustering sweeps with a
machine-readable report.

Each (sweep value, repetition) cell owns its synthetic instance; failures in
one cell are recorded in its rows and never abort the sweep.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core import DataMatrix, Hyperparams, PrecisionGraph, knn_graph
from ..decomposition import (FitResult, fit_dgrmd, fit_lgmd, fit_pca, fit_pmf,
                             gpca_factors, gpca_postprocess)
from ..errors import IoError, LgmdError
from ..metrics import (MetricReport, clustering_accuracy, column_correlations,
                       edge_recovery, kmeans, masked_rmse, subspace_angle)
from ..synth import SyntheticInstance, gen_cluster_instance, gen_instance, gen_mask
from .config import ExperimentConfig
from .io import load_matrix

SCHEMA_VERSION = "1"

_METRIC_COLUMNS = ("e1", "e2", "e3_mean_abs", "e4_mean_abs", "e5", "e6",
                   "e7", "e8", "clustering_accuracy")
_CSV_HEADER = ("method", "task", "sweep_value", "repetition", "status",
               "wall_time_s") + _METRIC_COLUMNS


@dataclass
class ReportRow:
    method: str
    task: str
    sweep_value: float
    repetition: int
    status: str
    wall_time: float
    metrics: MetricReport


@dataclass
class ExperimentReport:
    task: str
    rows: list[ReportRow] = field(default_factory=list)
    aggregates: list[dict] = field(default_factory=list)

    def ok_rows(self):
        return [r for r in self.rows if r.status == "ok"]

    def finalize(self) -> None:
        """Recompute mean/standard-error aggregates from the rows."""
        self.aggregates = []
        keys = sorted({(r.method, r.sweep_value) for r in self.rows},
                      key=lambda t: (t[1], t[0]))
        for method, sv in keys:
            cell = [r for r in self.rows
                    if r.method == method and r.sweep_value == sv and r.status == "ok"]
            entry = {"method": method, "sweep_value": sv, "count": len(cell)}
            for name in _METRIC_COLUMNS:
                vals = [r.metrics.scalar_items().get(name) for r in cell]
                vals = [v for v in vals if v is not None]
                if not vals:
                    continue
                arr = np.asarray(vals, dtype=float)
                entry[name + "_mean"] = float(arr.mean())
                entry[name + "_stderr"] = (
                    float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0)
            self.aggregates.append(entry)


def _derived_seed(base: int, *keys) -> int:
    ints = [int(base)] + [int(round(float(k) * 1e6)) if isinstance(k, float)
                          else int(k) for k in keys]
    return int(np.random.SeedSequence(ints).generate_state(1)[0])


def _hyperparams_for(cfg: ExperimentConfig) -> Hyperparams:
    return cfg.hyperparams()


def _fit_and_factors(method: str, y: DataMatrix, cfg: ExperimentConfig,
                     h: Hyperparams, postprocess: bool = True):
    """Fit one method and return (FitResult, display factors, graph pair).

    With ``postprocess`` the display factors of the graph-learning fits are
    canonicalized with the generalized-PCA step (reconstruction unchanged);
    the graph pair carries whatever edge structure the method used or
    learned (identity graphs for PCA/PMF).
    """
    if method == "pca":
        fit = fit_pca(y, h.k)
        return fit, fit.factors, (fit.a, fit.b)
    if method == "pmf":
        fit = fit_pmf(y, h)
        return fit, fit.factors, (fit.a, fit.b)
    if method == "dgrmd":
        l_sample = knn_graph(y, cfg.dgrmd_neighbors, "rows")
        l_feature = knn_graph(y, cfg.dgrmd_neighbors, "columns")
        fit = fit_dgrmd(y, h, l_sample, l_feature)
        return fit, fit.factors, (fit.a, fit.b)
    if method in ("lgmd", "lgmd_plus"):
        variant = "plain" if method == "lgmd" else "laplacian_plus"
        fit = fit_lgmd(y, h, variant=variant)
        factors = fit.factors
        if postprocess:
            recon = DataMatrix(fit.factors.product())
            factors = gpca_factors(gpca_postprocess(recon, fit.a, fit.b, h.k))
        return fit, factors, (fit.a, fit.b)
    raise ValueError("method %r is not a factorization" % method)


def _structure_metrics(inst: SyntheticInstance, graphs, top_fraction: float):
    a_est, b_est = graphs
    e7 = edge_recovery(inst.a_gt, a_est, top_fraction)
    e8 = edge_recovery(inst.b_gt, b_est, top_fraction)
    return e7, e8


def _safe_correlations(m: np.ndarray):
    try:
        return column_correlations(m)
    except (LgmdError, ValueError):
        return None


def _denoise_cell(cfg: ExperimentConfig, sweep_value: float, rep: int):
    inst = gen_instance(cfg.n, cfg.p, cfg.rank, sweep_value,
                        cfg.edge_fraction, _derived_seed(cfg.seed, 1, rep))
    all_true = np.ones(inst.y_no.shape, dtype=bool)
    rows = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        metrics = MetricReport(context=sweep_value)
        status = "ok"
        try:
            fit, factors, graphs = _fit_and_factors(method, inst.y_no, cfg,
                                                    _hyperparams_for(cfg))
            recon = factors.product()
            metrics.e2 = masked_rmse(inst.y_gt, recon, all_true)
            metrics.e3 = _safe_correlations(factors.x)
            metrics.e4 = _safe_correlations(factors.w)
            metrics.e5 = subspace_angle(inst.x_gt, factors.x)
            metrics.e6 = subspace_angle(inst.w_gt, factors.w)
            metrics.e7, metrics.e8 = _structure_metrics(
                inst, graphs, cfg.edge_top_fraction)
        except LgmdError as exc:
            status = "failed: %s" % exc
        rows.append(ReportRow(method, cfg.task, sweep_value, rep, status,
                              time.perf_counter() - t0, metrics))
    return rows


def _complete_cell(cfg: ExperimentConfig, sweep_value: float, rep: int):
    # the instance is shared across keep fractions (noise-free by protocol)
    inst = gen_instance(cfg.n, cfg.p, cfg.rank, 0.0, cfg.edge_fraction,
                        _derived_seed(cfg.seed, 1, rep))
    keep = sweep_value if sweep_value < 1.0 else 1.0 - cfg.holdout_fraction
    train_mask = gen_mask(cfg.n, cfg.p, keep,
                          _derived_seed(cfg.seed, 2, rep, sweep_value))
    eval_mask = ~train_mask
    y_train = DataMatrix(inst.y_no.values, train_mask)
    rows = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        metrics = MetricReport(context=sweep_value)
        status = "ok"
        try:
            if method == "pca":
                raise LgmdError("pca does not support masked input")
            fit, factors, graphs = _fit_and_factors(method, y_train, cfg,
                                                    _hyperparams_for(cfg))
            recon = factors.product()
            metrics.e1 = masked_rmse(inst.y_no, recon, eval_mask)
            metrics.e2 = masked_rmse(inst.y_gt, recon,
                                     np.ones(inst.y_gt.shape, dtype=bool))
            metrics.e5 = subspace_angle(inst.x_gt, factors.x)
            metrics.e6 = subspace_angle(inst.w_gt, factors.w)
            metrics.e7, metrics.e8 = _structure_metrics(
                inst, graphs, cfg.edge_top_fraction)
        except LgmdError as exc:
            status = "failed: %s" % exc
        rows.append(ReportRow(method, cfg.task, sweep_value, rep, status,
                              time.perf_counter() - t0, metrics))
    return rows


def _cluster_data(cfg: ExperimentConfig, n_clusters: int, rep: int):
    if cfg.data_path is not None:
        dm = load_matrix(cfg.data_path, cfg.data_format)
        col = cfg.label_column if cfg.label_column is not None else -1
        labels = dm.values[:, col].astype(int)
        values = np.delete(dm.values, col, axis=1)
        classes = np.unique(labels)
        if n_clusters > classes.size:
            raise LgmdError("file provides %d classes < %d clusters"
                            % (classes.size, n_clusters))
        rng = np.random.default_rng(_derived_seed(cfg.seed, 3, rep, n_clusters))
        chosen = rng.choice(classes, size=n_clusters, replace=False)
        sel = np.isin(labels, chosen)
        return DataMatrix(values[sel]), labels[sel]
    inst = gen_cluster_instance(cfg.n, cfg.p, cfg.rank, n_clusters,
                                cfg.sigma_ratio,
                                _derived_seed(cfg.seed, 3, rep, n_clusters),
                                separation=cfg.separation)
    return inst.y_no, inst.labels


def _cluster_cell(cfg: ExperimentConfig, sweep_value: float, rep: int):
    n_clusters = int(sweep_value)
    y, labels = _cluster_data(cfg, n_clusters, rep)
    km_seed = _derived_seed(cfg.seed, 4, rep, n_clusters)
    rows = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        metrics = MetricReport(context=sweep_value)
        status = "ok"
        try:
            if method == "kmeans":
                pred = kmeans(y.values, n_clusters, km_seed)
            else:
                _fit, factors, _graphs = _fit_and_factors(
                    method, y, cfg, _hyperparams_for(cfg), postprocess=False)
                pred = kmeans(factors.x, n_clusters, km_seed)
            metrics.clustering_accuracy = clustering_accuracy(pred, labels)
        except LgmdError as exc:
            status = "failed: %s" % exc
        rows.append(ReportRow(method, cfg.task, sweep_value, rep, status,
                              time.perf_counter() - t0, metrics))
    return rows


_CELL_FUNCS = {"denoise": _denoise_cell, "structure": _denoise_cell,
               "complete": _complete_cell, "cluster": _cluster_cell}


def _execute_cell(args):
    cfg, task, sweep_value, rep = args
    return _CELL_FUNCS[task](cfg, sweep_value, rep)


def _run(cfg: ExperimentConfig, task: str) -> ExperimentReport:
    cells = [(cfg, task, sv, rep) for sv in cfg.sweep
             for rep in range(cfg.repetitions)]
    report = ExperimentReport(task=task)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for rows in pool.map(_execute_cell, cells):
                report.rows.extend(rows)
    else:
        for cell in cells:
            report.rows.extend(_execute_cell(cell))
    report.finalize()
    return report


def run_denoise(cfg: ExperimentConfig) -> ExperimentReport:
    """Noise-ratio sweep on synthetic instances; records reconstruction,
    subspace and edge-recovery metrics per method."""
    return _run(cfg, "denoise" if cfg.task != "structure" else "structure")


def run_complete(cfg: ExperimentConfig) -> ExperimentReport:
    """Keep-fraction sweep on noise-free instances; the held-out complement
    of the training mask scores the completion error."""
    return _run(cfg, "complete")


def run_cluster(cfg: ExperimentConfig) -> ExperimentReport:
    """Cluster-count sweep; every factorization is scored by permutation-
    matched k-means accuracy on its sample factors."""
    return _run(cfg, "cluster")


def _row_record(row: ReportRow) -> dict:
    rec = {
        "method": row.method, "task": row.task,
        "sweep_value": row.sweep_value, "repetition": row.repetition,
        "status": row.status, "wall_time_s": row.wall_time,
    }
    rec.update(row.metrics.scalar_items())
    return rec


def emit_report(report: ExperimentReport, path: str, format: str = "csv") -> None:
    """Write the report: one row per record plus the aggregate rows."""
    if format not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    try:
        if format == "json":
            payload = {
                "schema_version": SCHEMA_VERSION,
                "task": report.task,
                "rows": [_row_record(r) for r in report.rows],
                "aggregates": report.aggregates,
            }
            with open(path, "w") as fh:
                json.dump(payload, fh, indent=1, sort_keys=True)
                fh.write("\n")
            return
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_CSV_HEADER)
            for row in report.rows:
                rec = _row_record(row)
                writer.writerow([_csv_cell(rec[c]) for c in _CSV_HEADER])
            for agg in report.aggregates:
                for stat in ("mean", "stderr"):
                    line = [agg["method"], report.task, agg["sweep_value"],
                            stat, "aggregate", ""]
                    line += [_csv_cell(agg.get("%s_%s" % (m, stat)))
                             for m in _METRIC_COLUMNS]
                    writer.writerow(line)
    except OSError as exc:
        raise IoError("cannot write report %s: %s" % (path, exc)) from exc


def _csv_cell(v):
    if v is None or v == "":
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return v


def load_report_json(path: str) -> dict:
    """Read back a JSON report (schema check included)."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IoError("cannot read report %s: %s" % (path, exc)) from exc
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise IoError("unsupported report schema %r" % payload.get("schema_version"))
    return payload
