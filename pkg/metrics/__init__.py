"""Evaluation metrics for execution traces."""

from .diversity import script_diversity, script_text
from .evaluation import (
    EvaluationReport,
    contact_error,
    evaluate_traces,
    success_rate,
    write_skill_csv,
)
from .motion import (
    GaussianStats,
    apd,
    fid,
    frechet_distance,
    gaussian_stats,
    motion_features,
    pooled_features,
)

__all__ = [
    "EvaluationReport",
    "GaussianStats",
    "apd",
    "contact_error",
    "evaluate_traces",
    "fid",
    "frechet_distance",
    "gaussian_stats",
    "motion_features",
    "pooled_features",
    "script_diversity",
    "script_text",
    "success_rate",
    "write_skill_csv",
]
