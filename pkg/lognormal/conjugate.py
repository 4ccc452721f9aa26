"""Hybrid Dai–Yuan nonlinear conjugate gradient on the model NLL.

The search runs over ``theta = (ln alpha, beta, zeta)`` so alpha stays
positive; ln alpha is clipped to ``[ln alpha_floor, ln alpha_cap]`` inside the
objective, which makes it flat beyond the bounds. Directions use
``max(0, min(beta_HS, beta_DY))`` and a strong-Wolfe line search. When the
line search fails the direction restarts along the negative gradient; a
failure along the negative gradient ends the run.
"""

from __future__ import annotations

import math

import numpy as np
import structlog
from scipy.optimize import line_search

from cohort.matrix import ResponseMatrix
from rtmodel.exceptions import FitError

from .config import FitConfig
from .objective import decrease_below_tolerance, gradient_arrays, nll_arrays

logger = structlog.get_logger(__name__)


class _Objective:
    """NLL and gradient as functions of the flat vector ``theta``."""

    def __init__(self, matrix: ResponseMatrix, cfg: FitConfig) -> None:
        self.matrix = matrix
        self.n_q = matrix.n_questions
        self.low = math.log(cfg.alpha_floor)
        self.high = math.log(cfg.alpha_cap)

    def split(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        log_alpha = np.clip(theta[: self.n_q], self.low, self.high)
        return np.exp(log_alpha), theta[self.n_q : 2 * self.n_q], theta[2 * self.n_q :]

    def value(self, theta: np.ndarray) -> float:
        return nll_arrays(self.matrix, *self.split(theta))

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        alpha, beta, zeta = self.split(theta)
        grad = gradient_arrays(self.matrix, alpha, beta, zeta)
        raw = theta[: self.n_q]
        inside = (raw > self.low) & (raw < self.high)
        # d/d(ln alpha) = alpha * d/d(alpha); zero where the clip is active
        return np.concatenate([np.where(inside, alpha * grad.alpha, 0.0), grad.beta, grad.zeta])


def minimize_dai_yuan(
    matrix: ResponseMatrix,
    cfg: FitConfig,
    start: tuple[np.ndarray, np.ndarray, np.ndarray],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[float], bool, int]:
    """Minimize the NLL from ``start`` = (alpha, beta, zeta).

    Returns (alpha, beta, zeta, nll_trace, converged, iterations).
    """
    objective = _Objective(matrix, cfg)
    alpha0, beta0, zeta0 = start
    theta = np.concatenate([np.log(alpha0), beta0, zeta0])
    value = objective.value(theta)
    if not math.isfinite(value):
        raise FitError("non-finite NLL", 0)
    grad = objective.gradient(theta)
    direction = -grad
    trace = [value]
    previous_value: float | None = None
    converged = False
    iteration = 0
    while iteration < cfg.max_iter:
        if not np.any(grad):
            converged = True
            break
        step, _fc, _gc, new_value, _old, _slope = line_search(
            objective.value,
            objective.gradient,
            theta,
            direction,
            gfk=grad,
            old_fval=value,
            old_old_fval=previous_value,
            c2=0.1,
        )
        if step is None or new_value is None or new_value > value:
            if np.array_equal(direction, -grad):
                logger.warning("fit.line_search_stalled", iteration=iteration, nll=value)
                break
            direction = -grad
            continue
        iteration += 1
        if not math.isfinite(new_value):
            raise FitError("non-finite NLL", iteration)
        theta = theta + step * direction
        new_grad = objective.gradient(theta)
        previous_value, value = value, float(new_value)
        trace.append(value)
        if decrease_below_tolerance(previous_value, value, cfg.rel_tol):
            converged = True
            grad = new_grad
            break
        y = new_grad - grad
        denom = float(direction @ y)
        weight = 0.0
        if denom > 0:
            weight = max(0.0, min(float(new_grad @ y) / denom, float(new_grad @ new_grad) / denom))
        direction = -new_grad + weight * direction
        if float(direction @ new_grad) >= 0:
            direction = -new_grad
        grad = new_grad

    alpha, beta, zeta = objective.split(theta)
    return alpha, beta.copy(), zeta.copy(), trace, converged, iteration
