"""Course-outcome and user-slowness models over learner records."""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from pathlib import Path

import pandas as pd
import structlog

from lognormal.params import ModelParams, read_params_csv
from rtmodel.exceptions import InputError, RegressionError

from .regression import RegressionResult, logistic_fixed_effects, ols_fixed_effects
from .standardize import Standardized, standardize_per_course

logger = structlog.get_logger(__name__)

ENGAGEMENT = ("videos", "play_clicks", "posts")
SLOWNESS_PREDICTORS = ("education", "age", *ENGAGEMENT)
OUTCOME_PREDICTORS = ("zeta1", "correctness", "education")

_ModelSpec = tuple[str, Callable[..., RegressionResult], pd.DataFrame, str, Sequence[str]]


def odds_factor(coefficient: float) -> float:
    """Multiplier on the odds for a unit increase of the predictor."""
    return math.exp(coefficient)


def normalize_for_slowness(frame: pd.DataFrame) -> Standardized:
    """Engagement counts to unit course mean, then slowness-model variables to unit variance."""
    by_mean = standardize_per_course(frame, ENGAGEMENT, "unit_mean")
    variables = ("zeta1", "zeta2", *SLOWNESS_PREDICTORS)
    by_variance = standardize_per_course(by_mean.frame, variables, "unit_variance")
    excluded = dict(by_mean.excluded)
    for variable, courses in by_variance.excluded.items():
        excluded[variable] = tuple(sorted(set(excluded.get(variable, ())) | set(courses)))
    return Standardized(by_variance.frame, excluded)


def slowness_models(frame: pd.DataFrame) -> tuple[RegressionResult, RegressionResult]:
    """First- and second-attempt slowness on education, age and engagement.

    Expects variables already rescaled by :func:`normalize_for_slowness`.
    """
    return (
        ols_fixed_effects(frame, "zeta1", SLOWNESS_PREDICTORS, label="Slowness 1"),
        ols_fixed_effects(frame, "zeta2", SLOWNESS_PREDICTORS, label="Slowness 2"),
    )


def _outcome_specs(frame: pd.DataFrame) -> list[_ModelSpec]:
    with_second = frame.dropna(subset=["zeta2"])
    specs: list[_ModelSpec] = []
    for variant, rows, predictors in (
        (1, frame, OUTCOME_PREDICTORS),
        (2, with_second, ("zeta1", "zeta2", "correctness", "education")),
    ):
        specs += [
            (f"Completion {variant}", logistic_fixed_effects, rows, "completed", predictors),
            (f"Certification {variant}", logistic_fixed_effects, rows, "certified", predictors),
            (f"Grade {variant}", ols_fixed_effects, rows, "grade", predictors),
        ]
    return specs


def outcome_models(frame: pd.DataFrame) -> list[RegressionResult]:
    """Completion, certification and grade, each without and with second-attempt slowness.

    Variant 2 models use only learners with a second-attempt slowness.

    Raises:
        RegressionError: From the first model that cannot be estimated.
    """
    return [
        estimator(rows, outcome, predictors, label=label)
        for label, estimator, rows, outcome, predictors in _outcome_specs(frame)
    ]


def run_outcome_analysis(
    frame: pd.DataFrame,
) -> tuple[list[RegressionResult], dict[str, str]]:
    """All outcome and slowness models; a model that fails is reported, not raised.

    Returns the estimated models and a mapping of failed model label to reason.
    """
    normalized = normalize_for_slowness(frame).frame
    specs = _outcome_specs(frame) + [
        (f"Slowness {n}", ols_fixed_effects, normalized, f"zeta{n}", SLOWNESS_PREDICTORS)
        for n in (1, 2)
    ]
    results: list[RegressionResult] = []
    failures: dict[str, str] = {}
    for label, estimator, rows, outcome, predictors in specs:
        try:
            results.append(estimator(rows, outcome, predictors, label=label))
        except RegressionError as exc:
            logger.warning("outcomes.model_failed", model=label, reason=exc.reason)
            failures[label] = str(exc)
    return results, failures


def attach_slowness(
    frame: pd.DataFrame,
    fits: Mapping[str, tuple[ModelParams | None, ModelParams | None]],
) -> pd.DataFrame:
    """Fill ``zeta1``/``zeta2`` from per-course first/second-attempt fits.

    Learners absent from a fit keep whatever value the records already had.
    """
    result = frame.copy()
    for column, position in (("zeta1", 0), ("zeta2", 1)):
        fitted: dict[tuple[str, str], float] = {}
        for course_id, pair in fits.items():
            params = pair[position]
            if params is not None:
                fitted.update(((course_id, u), z) for u, z in params.values("zeta").items())
        keys = list(zip(result["course_id"], result["user_id"]))
        looked_up = pd.Series([fitted.get(k) for k in keys], index=result.index, dtype=float)
        result[column] = looked_up.where(looked_up.notna(), result[column])
    return result


def read_fitted_slowness(
    fits_dir: Path,
) -> dict[str, tuple[ModelParams | None, ModelParams | None]]:
    """Load ``<course>/1_any/params.csv`` and ``<course>/2_any/params.csv`` under ``fits_dir``."""
    if not fits_dir.is_dir():
        raise InputError(f"fits directory {fits_dir} does not exist")
    fits: dict[str, tuple[ModelParams | None, ModelParams | None]] = {}
    for course_dir in sorted(p for p in fits_dir.iterdir() if p.is_dir()):
        first, second = (course_dir / "1_any" / "params.csv", course_dir / "2_any" / "params.csv")
        pair = (
            read_params_csv(first) if first.is_file() else None,
            read_params_csv(second) if second.is_file() else None,
        )
        if pair != (None, None):
            fits[course_dir.name] = pair
    logger.info("outcomes.fits_read", directory=str(fits_dir), courses=len(fits))
    return fits
