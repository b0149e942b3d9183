"""Experiment orchestration: matrix/report I/O, configuration,
hyperparameter search, experiment pipelines and the command-line interface."""

from .config import ExperimentConfig
from .experiments import (ExperimentReport, ReportRow, emit_report,
                          load_report_json, run_cluster, run_complete,
                          run_denoise)
from .io import load_matrix, save_matrix
from .tuning import tune_hyperparams

__all__ = [
    "ExperimentConfig", "ExperimentReport", "ReportRow", "emit_report",
    "load_report_json", "run_cluster", "run_complete", "run_denoise",
    "load_matrix", "save_matrix", "tune_hyperparams",
]
