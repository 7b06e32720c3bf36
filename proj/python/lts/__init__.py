"""Temporal Bayes filtering of per-point LiDAR semantic scores."""

from ._core import (
    BayesFilter,
    LtsError,
    associate,
    iou,
    logit,
    netspec,
    oracle_posterior,
    project,
    read_labels,
    read_poses,
    read_scan,
    read_scores,
    simulate,
    write_labels,
    write_scan,
    write_scores,
)

__all__ = [
    "BayesFilter",
    "LtsError",
    "associate",
    "iou",
    "logit",
    "netspec",
    "oracle_posterior",
    "project",
    "read_labels",
    "read_poses",
    "read_scan",
    "read_scores",
    "simulate",
    "write_labels",
    "write_scan",
    "write_scores",
]
