"""Goodness-of-fit statistics, cross-fit correlations and parameter summaries."""

from .correlation import (
    Correlation,
    DatasetStats,
    ParameterComparison,
    compare_fits,
    dataset_stats,
    intensity_discrimination_relation,
    parameter_ratio,
    pearson_with_se,
)
from .moments import (
    DeviationSet,
    MomentSet,
    ecdf_vs_normal,
    moment_deviations,
    per_question_deviations,
    percentile_curves,
    raw_moments,
    residuals_by_question,
)
from .report import FitDiagnostics, diagnose_fit, write_comparison, write_diagnostics
from .summaries import QuestionDescription, describe_question, parameter_density, parameter_summary

__all__ = [
    "Correlation",
    "DatasetStats",
    "DeviationSet",
    "FitDiagnostics",
    "MomentSet",
    "ParameterComparison",
    "QuestionDescription",
    "compare_fits",
    "dataset_stats",
    "describe_question",
    "diagnose_fit",
    "ecdf_vs_normal",
    "intensity_discrimination_relation",
    "moment_deviations",
    "parameter_density",
    "parameter_ratio",
    "parameter_summary",
    "pearson_with_se",
    "per_question_deviations",
    "percentile_curves",
    "raw_moments",
    "residuals_by_question",
    "write_comparison",
    "write_diagnostics",
]
