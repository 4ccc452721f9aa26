"""Dataset statistics and correlations between fitted parameter sets."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import structlog
from scipy import stats

from cohort.matrix import ResponseMatrix
from lognormal.params import PARAM_KINDS, ModelParams, normalize_identifiability
from rtmodel.exceptions import DiagnosticsError

logger = structlog.get_logger(__name__)

ComparisonStatus = Literal["ok", "insufficient_overlap", "zero_variance"]


@dataclass(frozen=True, slots=True)
class DatasetStats:
    n_users: int
    n_questions: int
    n_observations: int
    missingness: float
    ratio: float

    def to_dict(self) -> dict[str, float | int]:
        return {
            "n_users": self.n_users,
            "n_questions": self.n_questions,
            "n_observations": self.n_observations,
            "missingness": self.missingness,
            "ratio": self.ratio,
        }


@dataclass(frozen=True, slots=True)
class Correlation:
    """Pearson ``r`` with its large-sample standard error."""

    r: float
    se: float
    n: int


@dataclass(frozen=True, slots=True, eq=False)
class ParameterComparison:
    """Correlation of one parameter kind between two fits over their shared ids.

    ``scatter`` holds ``(id, a, b)`` rows; ``rmse`` is computed after both fits
    are normalized to mean zero slowness.
    """

    kind: str
    status: ComparisonStatus
    n_shared: int
    correlation: Correlation | None = None
    rmse: float | None = None
    scatter: tuple[tuple[str, float, float], ...] = field(default=(), repr=False)

    def to_dict(self) -> dict[str, object]:
        return {
            "kind": self.kind,
            "status": self.status,
            "n_shared": self.n_shared,
            "r": None if self.correlation is None else self.correlation.r,
            "se": None if self.correlation is None else self.correlation.se,
            "rmse": self.rmse,
        }


def parameter_ratio(n_users: int, n_questions: int, missingness: float) -> float:
    """Fit parameters per observation, ``(2 N_q + N_u - 1) / (N_u N_q (1 - m))``."""
    if missingness >= 1.0:
        raise DiagnosticsError("no observations (missingness is 1)")
    return (2 * n_questions + n_users - 1) / (n_users * n_questions * (1.0 - missingness))


def dataset_stats(matrix: ResponseMatrix) -> DatasetStats:
    """Size, missingness and parameter ratio of a qualified matrix.

    Raises:
        DiagnosticsError: The matrix has no observations.
    """
    if matrix.is_empty:
        raise DiagnosticsError(f"matrix {matrix.label.name} has no observations")
    cells = matrix.n_users * matrix.n_questions
    missingness = 1.0 - matrix.n_observations / cells
    return DatasetStats(
        n_users=matrix.n_users,
        n_questions=matrix.n_questions,
        n_observations=matrix.n_observations,
        missingness=missingness,
        ratio=parameter_ratio(matrix.n_users, matrix.n_questions, missingness),
    )


def pearson_with_se(
    a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray
) -> Correlation:
    """Sample Pearson ``r`` and ``se = sqrt((1 - r**2) / (n - 2))``.

    Raises:
        DiagnosticsError: Lengths differ, fewer than 3 points, or a side is constant.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DiagnosticsError("correlation needs two equal-length vectors")
    n = x.size
    if n < 3:
        raise DiagnosticsError(f"correlation needs at least 3 points, got {n}")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DiagnosticsError("zero variance")
    r = float(np.clip(stats.pearsonr(x, y)[0], -1.0, 1.0))
    return Correlation(r=r, se=float(np.sqrt((1.0 - r * r) / (n - 2))), n=n)


def _compare_kind(
    kind: str, a: ModelParams, b: ModelParams, min_overlap: int
) -> ParameterComparison:
    left, right = a.values(kind), b.values(kind)
    shared = sorted(set(left) & set(right))
    if len(shared) < min_overlap:
        return ParameterComparison(kind, "insufficient_overlap", len(shared))
    x = np.array([left[i] for i in shared])
    y = np.array([right[i] for i in shared])
    scatter = tuple(zip(shared, x.tolist(), y.tolist()))
    rmse = float(np.sqrt(np.mean((x - y) ** 2)))
    try:
        correlation = pearson_with_se(x, y)
    except DiagnosticsError:
        return ParameterComparison(kind, "zero_variance", len(shared), None, rmse, scatter)
    return ParameterComparison(kind, "ok", len(shared), correlation, rmse, scatter)


def compare_fits(
    a: ModelParams, b: ModelParams, *, min_overlap: int = 3
) -> dict[str, ParameterComparison]:
    """Correlate zeta, beta and alpha of two fits over the ids they share.

    Kinds with fewer than ``min_overlap`` shared ids are marked
    ``insufficient_overlap`` instead of failing.
    """
    a, b = normalize_identifiability(a), normalize_identifiability(b)
    result = {kind: _compare_kind(kind, a, b, min_overlap) for kind in reversed(PARAM_KINDS)}
    logger.debug(
        "diagnostics.compare",
        **{kind: comparison.status for kind, comparison in result.items()},
    )
    return result


def intensity_discrimination_relation(params: ModelParams) -> tuple[Correlation, np.ndarray]:
    """Correlation of ``beta_q`` with ``1 / alpha_q`` and the ``(1/alpha, beta)`` pairs.

    Raises:
        DiagnosticsError: Fewer than 3 questions or a constant side.
    """
    pairs = np.column_stack([1.0 / params.alpha, params.beta])
    return pearson_with_se(pairs[:, 0], pairs[:, 1]), pairs
