"""Experiment harness: ensembles, scans, CSV reports and the command line."""

from tfmult.xlab.ensemble import EnsembleSpec, build_ensemble, default_ensemble_spec
from tfmult.xlab.report import ExperimentReport, ReportRow, parse_report, write_report

__all__ = [
    "EnsembleSpec",
    "ExperimentReport",
    "ReportRow",
    "build_ensemble",
    "default_ensemble_spec",
    "parse_report",
    "write_report",
]
