"""Maximum-likelihood fit of the log-normal response-time model.

The default optimizer is block-coordinate descent. Every block has a closed
form minimizer with the other blocks held fixed:

* ``alpha_q = sqrt(n_q / sum_u r_qu**2)``, clamped to ``[alpha_floor, alpha_cap]``;
* ``beta_q`` = mean over the question's users of ``ln t_qu - zeta_u``;
* ``zeta_u`` = alpha²-weighted mean over the user's questions of ``ln t_qu - beta_q``.

Each block step is exact, so the NLL never increases. The hybrid Dai–Yuan
conjugate gradient in :mod:`lognormal.conjugate` minimizes the same objective.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import structlog

from cohort.matrix import ResponseMatrix
from rtmodel.exceptions import ConsistencyError, FitError, UnfittableError

from .config import FitConfig
from .conjugate import minimize_dai_yuan
from .objective import (
    aligned,
    decrease_below_tolerance,
    gradient_arrays,
    nll_arrays,
    residuals,
)
from .params import ModelParams, normalize_identifiability

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, slots=True)
class FitReport:
    """Convergence record of one fit.

    ``nll_trace`` starts with the NLL at initialization and holds one value
    per completed iteration; it never increases.
    """

    iterations: int
    nll_trace: tuple[float, ...]
    converged: bool
    final_gradient_norm: float
    wall_time: float
    optimizer: str = "block_coordinate"
    degenerate_questions: tuple[str, ...] = ()

    @property
    def final_nll(self) -> float:
        return self.nll_trace[-1]

    def to_dict(self) -> dict[str, object]:
        """JSON payload of the report; wall time is left out so reruns compare equal."""
        return {
            "iterations": self.iterations,
            "final_nll": self.final_nll,
            "converged": self.converged,
            "gradient_norm": self.final_gradient_norm,
            "optimizer": self.optimizer,
            "degenerate_questions": list(self.degenerate_questions),
        }


class AlphaUpdate(NamedTuple):
    alpha: np.ndarray
    degenerate: np.ndarray


def update_alpha_closed_form(
    matrix: ResponseMatrix,
    beta: np.ndarray,
    zeta: np.ndarray,
    cfg: FitConfig | None = None,
) -> AlphaUpdate:
    """Stationary alpha per question given beta and zeta.

    Questions whose residuals are all exactly zero get ``alpha_cap`` and are
    flagged degenerate.
    """
    cfg = cfg or FitConfig()
    r = residuals(matrix, beta, zeta)
    counts = np.bincount(matrix.cols, minlength=matrix.n_questions).astype(np.float64)
    squares = np.bincount(matrix.cols, weights=r * r, minlength=matrix.n_questions)
    if np.any(counts == 0):
        raise ConsistencyError("question without observations")
    degenerate = squares == 0.0
    with np.errstate(divide="ignore"):
        alpha = np.sqrt(counts / np.where(degenerate, 1.0, squares))
    alpha = np.where(degenerate, cfg.alpha_cap, np.clip(alpha, cfg.alpha_floor, cfg.alpha_cap))
    return AlphaUpdate(alpha, degenerate)


def _update_beta(matrix: ResponseMatrix, zeta: np.ndarray) -> np.ndarray:
    counts = np.bincount(matrix.cols, minlength=matrix.n_questions)
    if np.any(counts == 0):
        raise ConsistencyError("question without observations")
    sums = np.bincount(
        matrix.cols, weights=matrix.log_times - zeta[matrix.rows], minlength=matrix.n_questions
    )
    return sums / counts


def _update_zeta(matrix: ResponseMatrix, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    a2 = alpha[matrix.cols] ** 2
    weights = np.bincount(matrix.rows, weights=a2, minlength=matrix.n_users)
    if np.any(weights == 0):
        raise ConsistencyError("user without observations")
    sums = np.bincount(
        matrix.rows, weights=a2 * (matrix.log_times - beta[matrix.cols]), minlength=matrix.n_users
    )
    return sums / weights


def update_location_params(
    matrix: ResponseMatrix, params: ModelParams
) -> tuple[np.ndarray, np.ndarray]:
    """One exact block step for beta, then zeta, with alpha held fixed."""
    alpha, _beta, zeta = aligned(params, matrix)
    beta = _update_beta(matrix, zeta)
    return beta, _update_zeta(matrix, alpha, beta)


def initial_state(
    matrix: ResponseMatrix, cfg: FitConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Starting (alpha, beta, zeta): unit alpha, zero zeta, column means or zeros for beta."""
    alpha = np.ones(matrix.n_questions)
    zeta = np.zeros(matrix.n_users)
    if cfg.init == "column_means":
        beta = _update_beta(matrix, zeta)
    else:
        beta = np.zeros(matrix.n_questions)
    return alpha, beta, zeta


def _block_coordinate(
    matrix: ResponseMatrix, cfg: FitConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[float], bool, int]:
    alpha, beta, zeta = initial_state(matrix, cfg)
    current = nll_arrays(matrix, alpha, beta, zeta)
    if not math.isfinite(current):
        raise FitError("non-finite NLL", 0)
    trace = [current]
    converged = False
    iteration = 0
    while iteration < cfg.max_iter:
        iteration += 1
        new_alpha = update_alpha_closed_form(matrix, beta, zeta, cfg).alpha
        new_beta = _update_beta(matrix, zeta)
        new_zeta = _update_zeta(matrix, new_alpha, new_beta)
        shift = float(np.mean(new_zeta))
        new_zeta, new_beta = new_zeta - shift, new_beta + shift
        value = nll_arrays(matrix, new_alpha, new_beta, new_zeta)
        if not math.isfinite(value):
            raise FitError("non-finite NLL", iteration)
        if value > trace[-1]:
            # rounding floor reached; keep the previous iterate
            converged = True
            break
        alpha, beta, zeta = new_alpha, new_beta, new_zeta
        trace.append(value)
        logger.debug("fit.iteration", iteration=iteration, nll=value)
        if decrease_below_tolerance(trace[-2], value, cfg.rel_tol):
            converged = True
            break
    return alpha, beta, zeta, trace, converged, iteration


def fit(matrix: ResponseMatrix, cfg: FitConfig | None = None) -> tuple[ModelParams, FitReport]:
    """Fit alpha, beta and zeta to a qualified matrix by minimizing the NLL.

    Non-convergence within ``max_iter`` is reported, not raised.

    Raises:
        UnfittableError: The matrix is empty or flagged unfittable.
        FitError: The NLL became non-finite; carries the iteration index.
    """
    cfg = cfg or FitConfig()
    if matrix.unfittable or matrix.is_empty:
        raise UnfittableError(f"unfittable: matrix {matrix.label.name} is empty")
    started = time.perf_counter()
    if cfg.optimizer == "conjugate_gradient":
        alpha, beta, zeta, trace, converged, iterations = minimize_dai_yuan(
            matrix, cfg, initial_state(matrix, cfg)
        )
    else:
        alpha, beta, zeta, trace, converged, iterations = _block_coordinate(matrix, cfg)

    degenerate = update_alpha_closed_form(matrix, beta, zeta, cfg).degenerate & (
        alpha >= cfg.alpha_cap
    )
    params = normalize_identifiability(
        ModelParams(
            question_ids=matrix.question_ids,
            user_ids=matrix.user_ids,
            alpha=alpha,
            beta=beta,
            zeta=zeta,
            degenerate=frozenset(np.asarray(matrix.question_ids)[degenerate].tolist()),
        )
    )
    gradient = gradient_arrays(matrix, params.alpha, params.beta, params.zeta)
    report = FitReport(
        iterations=iterations,
        nll_trace=tuple(trace),
        converged=converged,
        final_gradient_norm=gradient.norm(),
        wall_time=time.perf_counter() - started,
        optimizer=cfg.optimizer,
        degenerate_questions=tuple(sorted(params.degenerate)),
    )
    logger.info(
        "fit.done",
        subset=matrix.label.name,
        optimizer=cfg.optimizer,
        iterations=iterations,
        converged=converged,
        nll=report.final_nll,
        gradient_norm=report.final_gradient_norm,
        degenerate=len(report.degenerate_questions),
        wall_time=round(report.wall_time, 3),
    )
    return params, report
