"""Negative log-likelihood of the log-normal model and its derivatives.

Over the observed cells ``O`` of a matrix::

    NLL = sum_(q,u in O) [ alpha_q**2 / 2 * (beta_q + zeta_u - ln t_qu)**2 - ln alpha_q ]

(the constant ``|O| ln sqrt(2 pi)`` and the ``ln t`` Jacobian are dropped).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cohort.matrix import ResponseMatrix
from rtmodel.exceptions import ConsistencyError

from .params import ModelParams


@dataclass(frozen=True, slots=True, eq=False)
class Gradient:
    """Partial derivatives of the NLL with respect to alpha, beta and zeta."""

    alpha: np.ndarray
    beta: np.ndarray
    zeta: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta, self.zeta])

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat()))


def aligned(params: ModelParams, matrix: ResponseMatrix) -> tuple[np.ndarray, ...]:
    """Return (alpha, beta, zeta) ordered like the matrix columns and rows.

    Raises:
        ConsistencyError: A matrix row or column has no parameter.
    """
    if params.question_ids == matrix.question_ids and params.user_ids == matrix.user_ids:
        return params.alpha, params.beta, params.zeta
    try:
        q_idx = np.array([params.question_index(q) for q in matrix.question_ids], dtype=np.int64)
        u_idx = np.array([params.user_index(u) for u in matrix.user_ids], dtype=np.int64)
    except KeyError as exc:
        raise ConsistencyError(f"no parameter for {exc.args[0]!r}") from exc
    return params.alpha[q_idx], params.beta[q_idx], params.zeta[u_idx]


def residuals(
    matrix: ResponseMatrix, beta: np.ndarray, zeta: np.ndarray
) -> np.ndarray:
    """``beta_q + zeta_u - ln t_qu`` for every observed cell."""
    return beta[matrix.cols] + zeta[matrix.rows] - matrix.log_times


def nll_arrays(
    matrix: ResponseMatrix, alpha: np.ndarray, beta: np.ndarray, zeta: np.ndarray
) -> float:
    a = alpha[matrix.cols]
    r = residuals(matrix, beta, zeta)
    return float(np.sum(0.5 * a * a * r * r - np.log(a)))


def gradient_arrays(
    matrix: ResponseMatrix, alpha: np.ndarray, beta: np.ndarray, zeta: np.ndarray
) -> Gradient:
    r = residuals(matrix, beta, zeta)
    a = alpha[matrix.cols]
    weighted = a * a * r
    counts = np.bincount(matrix.cols, minlength=matrix.n_questions)
    squares = np.bincount(matrix.cols, weights=r * r, minlength=matrix.n_questions)
    return Gradient(
        alpha=alpha * squares - counts / alpha,
        beta=np.bincount(matrix.cols, weights=weighted, minlength=matrix.n_questions),
        zeta=np.bincount(matrix.rows, weights=weighted, minlength=matrix.n_users),
    )


def nll(params: ModelParams, matrix: ResponseMatrix) -> float:
    """Negative log-likelihood of ``params`` on the observed entries of ``matrix``."""
    return nll_arrays(matrix, *aligned(params, matrix))


def nll_gradient(params: ModelParams, matrix: ResponseMatrix) -> Gradient:
    """Analytic gradient of :func:`nll`, ordered like the matrix columns and rows."""
    return gradient_arrays(matrix, *aligned(params, matrix))


def standardized_residuals(params: ModelParams, matrix: ResponseMatrix) -> np.ndarray:
    """``x_qu = alpha_q (ln t_qu - beta_q - zeta_u)``, one per observed cell.

    Under a correctly specified model these are standard normal.
    """
    alpha, beta, zeta = aligned(params, matrix)
    return -alpha[matrix.cols] * residuals(matrix, beta, zeta)


def decrease_below_tolerance(previous: float, current: float, rel_tol: float) -> bool:
    """True when one step lowered the NLL by less than ``rel_tol * max(|previous|, 1)``."""
    return previous - current < rel_tol * max(abs(previous), 1.0)
