"""Per-course rescaling of learner variables."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import pandas as pd
import structlog

logger = structlog.get_logger(__name__)

ScaleMode = Literal["unit_mean", "unit_variance"]


@dataclass(frozen=True, eq=False)
class Standardized:
    """Rescaled records and, per variable, the courses that could not be rescaled.

    Values of an excluded (variable, course) are set to NaN so regressions
    using that variable skip the course.
    """

    frame: pd.DataFrame
    excluded: dict[str, tuple[str, ...]] = field(default_factory=dict)


def _course_scale(values: pd.Series, mode: ScaleMode) -> float:
    finite = values.dropna().to_numpy(dtype=np.float64)
    if finite.size == 0:
        return float("nan")
    if mode == "unit_mean":
        return float(finite.mean())
    return float(finite.std())


def standardize_per_course(
    frame: pd.DataFrame, variables: Sequence[str], mode: ScaleMode
) -> Standardized:
    """Divide each variable by its per-course mean or per-course standard deviation.

    A course where the mean is zero (``unit_mean``) or the variable is
    constant (``unit_variance``, population sd) is excluded for that variable.
    """
    result = frame.copy()
    excluded: dict[str, tuple[str, ...]] = {}
    for variable in variables:
        values = result[variable].astype(float)
        scales = values.groupby(result["course_id"]).agg(lambda s: _course_scale(s, mode))
        typical = values.abs().groupby(result["course_id"]).mean().reindex(scales.index)
        bad = ~np.isfinite(scales) | (scales.abs() <= 1e-12 * np.maximum(typical, 1.0))
        if bad.any():
            excluded[variable] = tuple(sorted(scales.index[bad]))
            logger.warning(
                "outcomes.degenerate_variable",
                variable=variable,
                mode=mode,
                courses=list(excluded[variable]),
            )
        per_row = result["course_id"].map(scales.where(~bad))
        result[variable] = values / per_row
    return Standardized(result, excluded)
