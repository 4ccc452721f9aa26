"""Regressions relating fitted slowness to course outcomes and engagement."""

from .models import (
    attach_slowness,
    normalize_for_slowness,
    odds_factor,
    outcome_models,
    read_fitted_slowness,
    run_outcome_analysis,
    slowness_models,
)
from .records import LearnerRecord, learner_frame, read_learner_records
from .regression import (
    RegressionResult,
    logistic_fixed_effects,
    ols_fixed_effects,
    write_regression_tables,
)
from .standardize import Standardized, standardize_per_course

__all__ = [
    "LearnerRecord",
    "RegressionResult",
    "Standardized",
    "attach_slowness",
    "learner_frame",
    "logistic_fixed_effects",
    "normalize_for_slowness",
    "odds_factor",
    "ols_fixed_effects",
    "outcome_models",
    "read_fitted_slowness",
    "read_learner_records",
    "run_outcome_analysis",
    "slowness_models",
    "standardize_per_course",
    "write_regression_tables",
]
