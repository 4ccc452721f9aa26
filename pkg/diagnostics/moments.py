"""Moments of standardized residuals and their deviations from the normal ones.

For standardized residuals ``x`` the raw moments ``m_k = mean(x**k)`` are
taken about the ideal mean 0. A standard normal has ``m = (0, 1, 0, 3)``;
the deviations compare k-th roots so that every ``d_k`` is on the scale of
``x``::

    d_k = m_k ** (1/k) - m0_k ** (1/k)

with a signed cube root for ``k = 3``.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import astuple, dataclass

import numpy as np
from scipy.special import ndtr

from cohort.matrix import ResponseMatrix
from lognormal.objective import standardized_residuals
from lognormal.params import ModelParams
from rtmodel.exceptions import DiagnosticsError

NORMAL_MOMENTS = (0.0, 1.0, 0.0, 3.0)
DEVIATION_NAMES = ("d1", "d2", "d3", "d4")


@dataclass(frozen=True, slots=True)
class MomentSet:
    """Raw moments ``m1..m4`` of a sample."""

    m1: float
    m2: float
    m3: float
    m4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return astuple(self)  # type: ignore[return-value]


@dataclass(frozen=True, slots=True)
class DeviationSet:
    d1: float
    d2: float
    d3: float
    d4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return astuple(self)  # type: ignore[return-value]


def _as_sample(x: Iterable[float] | np.ndarray) -> np.ndarray:
    arr = np.asarray(list(x) if not isinstance(x, np.ndarray) else x, dtype=np.float64)
    if arr.size == 0:
        raise DiagnosticsError("empty sample")
    return arr.ravel()


def raw_moments(x: Iterable[float] | np.ndarray, centre: float = 0.0) -> MomentSet:
    """Raw moments of ``x`` about ``centre`` (0 unless told otherwise).

    Raises:
        DiagnosticsError: ``x`` is empty.
    """
    arr = _as_sample(x) - centre
    sq = arr * arr
    return MomentSet(
        m1=float(np.mean(arr)),
        m2=float(np.mean(sq)),
        m3=float(np.mean(sq * arr)),
        m4=float(np.mean(sq * sq)),
    )


def moment_deviations(m: MomentSet) -> DeviationSet:
    """k-th-root deviations of ``m`` from the standard-normal moments.

    Raises:
        DiagnosticsError: ``m2`` or ``m4`` is negative.
    """
    if m.m2 < 0 or m.m4 < 0:
        raise DiagnosticsError(f"even moments must be non-negative, got m2={m.m2} m4={m.m4}")
    return DeviationSet(
        d1=m.m1,
        d2=float(np.sqrt(m.m2)) - 1.0,
        d3=float(np.cbrt(m.m3)),
        d4=float(m.m4**0.25 - NORMAL_MOMENTS[3] ** 0.25),
    )


def residuals_by_question(params: ModelParams, matrix: ResponseMatrix) -> dict[str, np.ndarray]:
    """Standardized residuals grouped by question id."""
    return matrix.by_question(standardized_residuals(params, matrix))


def per_question_deviations(
    groups: Mapping[str, Sequence[float] | np.ndarray], *, about_mean: bool = False
) -> dict[str, DeviationSet]:
    """Deviation set of every group.

    Moments are taken about 0 unless ``about_mean`` is set, in which case each
    group is centred on its own sample mean first.
    """
    result: dict[str, DeviationSet] = {}
    for question_id, values in groups.items():
        sample = _as_sample(values)
        centre = float(np.mean(sample)) if about_mean else 0.0
        result[question_id] = moment_deviations(raw_moments(sample, centre))
    return result


def percentile_curves(
    deviations: Mapping[str, DeviationSet],
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Cumulative distribution over questions of each ``d_k``.

    Returns ``{"d1": (x, y), ...}`` with ``x`` the sorted deviations and
    ``y = i / n``; perfect agreement with the model is a unit step at 0.
    """
    if not deviations:
        raise DiagnosticsError("no question deviations")
    table = np.array([d.as_tuple() for d in deviations.values()], dtype=np.float64)
    n = table.shape[0]
    y = np.arange(1, n + 1, dtype=np.float64) / n
    return {name: (np.sort(table[:, k]), y) for k, name in enumerate(DEVIATION_NAMES)}


def ecdf_vs_normal(x: Iterable[float] | np.ndarray) -> np.ndarray:
    """Pairs ``(Phi(x_(i)), i/n)`` over the ascending sample, shape ``(n, 2)``.

    A perfect fit lies on the identity line.

    Raises:
        DiagnosticsError: ``x`` is empty.
    """
    arr = np.sort(_as_sample(x))
    n = arr.size
    return np.column_stack([ndtr(arr), np.arange(1, n + 1, dtype=np.float64) / n])
