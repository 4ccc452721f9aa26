"""Linear and logistic regressions with one intercept per course.

Course effects enter as indicator columns, one per course and no global
intercept. p-values use the normal approximation for both model families.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
import structlog
from scipy.special import expit
from scipy.stats import norm

from rtmodel.exceptions import RegressionError

logger = structlog.get_logger(__name__)

FIXED_EFFECTS_TAG = "course fixed effects"
SEPARATION_LIMIT = 30.0
MAX_IRLS_ITER = 100
IRLS_TOL = 1e-8

ModelKind = Literal["ols", "logistic"]


@dataclass(frozen=True, eq=False)
class RegressionResult:
    """Estimates of one model.

    ``coef``/``se``/``z``/``p`` are aligned with ``predictors``; course
    intercepts are kept apart in ``course_effects``.
    """

    label: str
    kind: ModelKind
    outcome: str
    predictors: tuple[str, ...]
    coef: np.ndarray
    se: np.ndarray
    z: np.ndarray
    p: np.ndarray
    n: int
    sd_pooled: dict[str, float]
    sd_course: dict[str, float]
    course_effects: dict[str, float]
    excluded_courses: tuple[str, ...] = ()
    iterations: int = 1
    converged: bool = True
    log_likelihood_trace: tuple[float, ...] = field(default=(), repr=False)

    def coefficient(self, predictor: str) -> float:
        return float(self.coef[self.predictors.index(predictor)])

    def table(self) -> pd.DataFrame:
        """One row per predictor: sd, coefficient, se, z and p."""
        return pd.DataFrame(
            {
                "model": self.label,
                "predictor": list(self.predictors),
                "sd_pooled": [self.sd_pooled[p] for p in self.predictors],
                "sd_course": [self.sd_course[p] for p in self.predictors],
                "coef": self.coef,
                "se": self.se,
                "z": self.z,
                "p": self.p,
                "n": self.n,
                "converged": self.converged,
            }
        )


@dataclass(frozen=True, eq=False)
class _Design:
    x: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...]
    courses: tuple[str, ...]
    rows: pd.DataFrame


def _design(
    frame: pd.DataFrame, outcome: str, predictors: Sequence[str]
) -> _Design:
    used = frame.dropna(subset=[outcome, *predictors]).sort_values(
        ["course_id", "user_id"], kind="stable"
    )
    courses = tuple(sorted(used["course_id"].unique()))
    dummies = (used["course_id"].to_numpy()[:, None] == np.array(courses)[None, :]).astype(float)
    x = np.column_stack([used[list(predictors)].to_numpy(dtype=np.float64), dummies])
    columns = (*predictors, *(f"course[{c}]" for c in courses))
    if x.shape[0] <= x.shape[1]:
        raise RegressionError(
            "too_few_records", f"{x.shape[0]} records for {x.shape[1]} columns"
        )
    _check_rank(x, columns)
    return _Design(x, used[outcome].to_numpy(dtype=np.float64), columns, courses, used)


def _check_rank(x: np.ndarray, columns: Sequence[str]) -> None:
    if np.linalg.matrix_rank(x) == x.shape[1]:
        return
    collinear: list[str] = []
    kept: list[int] = []
    for j, name in enumerate(columns):
        if np.linalg.matrix_rank(x[:, [*kept, j]]) == len(kept) + 1:
            kept.append(j)
        else:
            collinear.append(name)
    raise RegressionError("rank_deficient", f"collinear columns: {', '.join(collinear)}")


def _predictor_sds(
    design: _Design, predictors: Sequence[str]
) -> tuple[dict[str, float], dict[str, float]]:
    rows = design.rows
    pooled = {p: float(rows[p].std(ddof=1)) for p in predictors}
    per_course = {
        p: float(rows.groupby("course_id")[p].std(ddof=1).dropna().mean()) for p in predictors
    }
    return pooled, per_course


def _wald(coef: np.ndarray, cov: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, coef / se, np.where(coef == 0, 0.0, np.sign(coef) * np.inf))
    p = 2.0 * norm.sf(np.abs(z))
    return se, z, p


def _result(
    label: str,
    kind: ModelKind,
    outcome: str,
    predictors: Sequence[str],
    design: _Design,
    coef: np.ndarray,
    cov: np.ndarray,
    **extra: object,
) -> RegressionResult:
    se, z, p = _wald(coef, cov)
    k = len(predictors)
    pooled, per_course = _predictor_sds(design, predictors)
    return RegressionResult(
        label=f"{label} ({FIXED_EFFECTS_TAG})",
        kind=kind,
        outcome=outcome,
        predictors=tuple(predictors),
        coef=coef[:k],
        se=se[:k],
        z=z[:k],
        p=p[:k],
        n=int(design.x.shape[0]),
        sd_pooled=pooled,
        sd_course=per_course,
        course_effects=dict(zip(design.courses, coef[k:].tolist())),
        **extra,  # type: ignore[arg-type]
    )


def ols_fixed_effects(
    frame: pd.DataFrame, outcome: str, predictors: Sequence[str], label: str = ""
) -> RegressionResult:
    """Least squares of ``outcome`` on ``predictors`` plus course intercepts.

    Rows with a missing outcome or predictor are skipped.

    Raises:
        RegressionError: Rank deficiency (naming the collinear columns) or too few records.
    """
    design = _design(frame, outcome, predictors)
    coef, *_ = np.linalg.lstsq(design.x, design.y, rcond=None)
    resid = design.y - design.x @ coef
    dof = design.x.shape[0] - design.x.shape[1]
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(design.x.T @ design.x)
    result = _result(label or outcome, "ols", outcome, predictors, design, coef, cov)
    logger.info("outcomes.ols", model=result.label, n=result.n, residual_sd=sigma2**0.5)
    return result


def _log_likelihood(x: np.ndarray, y: np.ndarray, coef: np.ndarray) -> float:
    eta = x @ coef
    # y * eta - log(1 + e^eta), written to stay finite for large |eta|
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _drop_constant_courses(
    frame: pd.DataFrame, outcome: str
) -> tuple[pd.DataFrame, tuple[str, ...]]:
    spread = frame.dropna(subset=[outcome]).groupby("course_id")[outcome].nunique()
    constant = tuple(sorted(spread.index[spread < 2]))
    if constant:
        logger.info("outcomes.constant_courses", outcome=outcome, courses=list(constant))
    return frame[~frame["course_id"].isin(constant)], constant


def logistic_fixed_effects(
    frame: pd.DataFrame,
    outcome: str,
    predictors: Sequence[str],
    label: str = "",
    max_iter: int = MAX_IRLS_ITER,
) -> RegressionResult:
    """Logistic regression by iteratively reweighted least squares.

    Courses where the outcome never varies carry no information about the
    slopes and are left out. Each Newton step is halved until the
    log-likelihood does not drop; iteration stops when no coefficient moves by
    more than ``1e-8``, or when no step can raise it. Hitting ``max_iter``
    first leaves ``converged`` false.

    Raises:
        RegressionError: ``constant_outcome``, ``separation_suspected`` (a
            coefficient beyond +-30), ``rank_deficient`` or ``too_few_records``.
    """
    values = frame[outcome].dropna().astype(float)
    if values.nunique() < 2:
        raise RegressionError("constant_outcome", outcome)
    kept, excluded = _drop_constant_courses(frame, outcome)
    design = _design(kept, outcome, predictors)
    x, y = design.x, design.y
    coef = np.zeros(x.shape[1])
    trace = [_log_likelihood(x, y, coef)]
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        prob = expit(x @ coef)
        weights = prob * (1.0 - prob)
        try:
            step = np.linalg.solve(x.T @ (weights[:, None] * x), x.T @ (y - prob))
        except np.linalg.LinAlgError as exc:
            raise RegressionError("separation_suspected", "singular information matrix") from exc
        scale = 1.0
        candidate = coef + step
        value = _log_likelihood(x, y, candidate)
        while value < trace[-1] and scale > 1e-10:
            scale /= 2.0
            candidate = coef + scale * step
            value = _log_likelihood(x, y, candidate)
        if value < trace[-1]:
            converged = True
            break
        if np.max(np.abs(candidate)) > SEPARATION_LIMIT:
            raise RegressionError(
                "separation_suspected",
                f"coefficient beyond {SEPARATION_LIMIT} at step {iterations}",
            )
        change = float(np.max(np.abs(candidate - coef)))
        coef = candidate
        trace.append(value)
        if change < IRLS_TOL:
            converged = True
            break
    if not converged:
        logger.warning(
            "outcomes.logistic_not_converged", model=label or outcome, iterations=iterations
        )
    prob = expit(x @ coef)
    info = x.T @ ((prob * (1.0 - prob))[:, None] * x)
    result = _result(
        label or outcome,
        "logistic",
        outcome,
        predictors,
        design,
        coef,
        np.linalg.pinv(info),
        excluded_courses=excluded,
        iterations=iterations,
        converged=converged,
        log_likelihood_trace=tuple(trace),
    )
    logger.info(
        "outcomes.logistic",
        model=result.label,
        n=result.n,
        iterations=iterations,
        log_likelihood=trace[-1],
    )
    return result


def write_regression_tables(results: Sequence[RegressionResult], directory: Path) -> None:
    """Write ``regressions.csv`` (one row per model and predictor) and ``course_effects.csv``."""
    directory.mkdir(parents=True, exist_ok=True)
    tables = [r.table() for r in results]
    columns = [
        "model", "predictor", "sd_pooled", "sd_course", "coef", "se", "z", "p", "n", "converged"
    ]
    frame = pd.concat(tables, ignore_index=True) if tables else pd.DataFrame(columns=columns)
    frame.to_csv(directory / "regressions.csv", index=False)
    effects = [
        (r.label, course, value) for r in results for course, value in r.course_effects.items()
    ]
    pd.DataFrame(effects, columns=["model", "course_id", "intercept"]).to_csv(
        directory / "course_effects.csv", index=False
    )
