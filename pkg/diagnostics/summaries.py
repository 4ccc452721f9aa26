"""Human-readable descriptions of fitted question parameters."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.stats import gaussian_kde

from lognormal.params import ModelParams
from rtmodel.exceptions import DiagnosticsError

_EXP_LIMIT = 709.0


@dataclass(frozen=True, slots=True)
class QuestionDescription:
    """``exp(beta)`` seconds, with most times within a factor ``exp(1/alpha)`` of it."""

    typical_seconds: float
    spread_factor: float

    @property
    def typical_range(self) -> tuple[float, float]:
        return self.typical_seconds / self.spread_factor, self.typical_seconds * self.spread_factor


def describe_question(alpha: float, beta: float) -> QuestionDescription:
    """Translate (alpha, beta) into a typical time and a spread factor.

    Raises:
        DiagnosticsError: ``alpha`` is not positive.
    """
    if not alpha > 0:
        raise DiagnosticsError(f"alpha must be positive, got {alpha}")
    inverse = 1.0 / alpha
    spread = math.exp(inverse) if inverse < _EXP_LIMIT else math.inf
    return QuestionDescription(
        typical_seconds=math.exp(min(beta, _EXP_LIMIT)), spread_factor=spread
    )


def parameter_density(
    values: Sequence[float] | np.ndarray, points: int = 200
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-kernel density of a parameter across questions, as ``(x, y)``.

    The grid spans the sample range padded by three kernel bandwidths.
    """
    sample = np.asarray(values, dtype=np.float64)
    if sample.size < 2 or np.ptp(sample) == 0:
        raise DiagnosticsError("density needs at least two distinct values")
    kde = gaussian_kde(sample)
    pad = 3.0 * float(np.sqrt(kde.covariance[0, 0]))
    x = np.linspace(sample.min() - pad, sample.max() + pad, points)
    return x, kde(x)


def parameter_summary(params: ModelParams) -> dict[str, float | int]:
    """Median question parameters with their interpretation."""
    if not params.question_ids:
        raise DiagnosticsError("no questions to summarize")
    alpha = float(np.median(params.alpha))
    beta = float(np.median(params.beta))
    description = describe_question(alpha, beta)
    low, high = description.typical_range
    return {
        "n_questions": len(params.question_ids),
        "n_users": len(params.user_ids),
        "median_alpha": alpha,
        "median_beta": beta,
        "typical_seconds": description.typical_seconds,
        "spread_factor": description.spread_factor,
        "typical_low_seconds": low,
        "typical_high_seconds": high,
        "zeta_sd": float(np.std(params.zeta)) if params.user_ids else 0.0,
    }
