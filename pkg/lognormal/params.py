"""Fitted parameters of the log-normal response-time model.

``ln t_qu ~ Normal(beta_q + zeta_u, 1 / alpha_q**2)``: every question has a
discrimination ``alpha_q > 0`` and a time intensity ``beta_q``, every user a
slowness ``zeta_u``. Shifting all betas up and all zetas down by the same
constant leaves the model unchanged; the convention here is ``mean(zeta) = 0``.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from rtmodel.exceptions import ConsistencyError, InputError

PARAM_KINDS = ("alpha", "beta", "zeta")


def _frozen(values: Iterable[float] | np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Per-question (alpha, beta) and per-user zeta, aligned with the id tuples."""

    question_ids: tuple[str, ...]
    user_ids: tuple[str, ...]
    alpha: np.ndarray
    beta: np.ndarray
    zeta: np.ndarray
    degenerate: frozenset[str] = frozenset()
    _question_pos: dict[str, int] = field(init=False, repr=False)
    _user_pos: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        alpha, beta, zeta = _frozen(self.alpha), _frozen(self.beta), _frozen(self.zeta)
        if alpha.shape != (len(self.question_ids),) or beta.shape != alpha.shape:
            raise ConsistencyError("alpha and beta must have one value per question")
        if zeta.shape != (len(self.user_ids),):
            raise ConsistencyError("zeta must have one value per user")
        if np.any(alpha <= 0):
            raise ConsistencyError("alpha must be positive")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "_question_pos", {q: j for j, q in enumerate(self.question_ids)})
        object.__setattr__(self, "_user_pos", {u: i for i, u in enumerate(self.user_ids)})

    def question_index(self, question_id: str) -> int:
        return self._question_pos[question_id]

    def user_index(self, user_id: str) -> int:
        return self._user_pos[user_id]

    def has_question(self, question_id: str) -> bool:
        return question_id in self._question_pos

    def has_user(self, user_id: str) -> bool:
        return user_id in self._user_pos

    def values(self, kind: str) -> dict[str, float]:
        """Parameter ``kind`` ("alpha", "beta" or "zeta") keyed by id."""
        ids = self.user_ids if kind == "zeta" else self.question_ids
        return dict(zip(ids, getattr(self, kind).tolist()))

    def replace(self, **changes: object) -> ModelParams:
        return dataclasses.replace(self, **changes)  # type: ignore[arg-type]


def normalize_identifiability(params: ModelParams) -> ModelParams:
    """Shift zeta to zero mean and beta by the opposite amount."""
    if not params.user_ids:
        return params
    shift = float(np.mean(params.zeta))
    if shift == 0.0:
        return params
    return params.replace(zeta=params.zeta - shift, beta=params.beta + shift)


def predict_log_time(params: ModelParams, question_id: str, user_id: str) -> float:
    """Expected ``ln t`` of a user on a question, ``beta_q + zeta_u``.

    Raises:
        KeyError: Unknown question or user id.
    """
    return float(
        params.beta[params.question_index(question_id)] + params.zeta[params.user_index(user_id)]
    )


def write_params_csv(params: ModelParams, path: Path) -> None:
    """Write ``kind,id,value`` rows: alphas, then betas, then zetas."""
    rows = [
        (kind, ident, value)
        for kind in PARAM_KINDS
        for ident, value in params.values(kind).items()
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=["kind", "id", "value"]).to_csv(path, index=False)


def read_params_csv(path: Path, degenerate: Iterable[str] = ()) -> ModelParams:
    """Read a parameter file written by :func:`write_params_csv`.

    The file has no room for the capped-alpha flags; pass them as
    ``degenerate`` (a fit report's ``degenerate_questions``) to restore them.

    Raises:
        ConsistencyError: A ``degenerate`` id is not a question of the file.
    """
    try:
        frame = pd.read_csv(path, dtype={"kind": str, "id": str}, keep_default_na=False)
    except OSError as exc:
        raise InputError(f"cannot read parameters {path}: {exc}") from exc
    by_kind = {
        kind: dict(zip(group["id"], group["value"].astype(float)))
        for kind, group in frame.groupby("kind", sort=False)
    }
    alpha, beta = by_kind.get("alpha", {}), by_kind.get("beta", {})
    zeta = by_kind.get("zeta", {})
    if set(alpha) != set(beta):
        raise ConsistencyError(f"alpha and beta cover different questions in {path}")
    questions = tuple(sorted(alpha))
    users = tuple(sorted(zeta))
    flagged = frozenset(degenerate)
    if not flagged <= set(questions):
        unknown = ", ".join(sorted(flagged - set(questions)))
        raise ConsistencyError(f"degenerate questions not in {path}: {unknown}")
    return ModelParams(
        question_ids=questions,
        user_ids=users,
        alpha=[alpha[q] for q in questions],
        beta=[beta[q] for q in questions],
        zeta=[zeta[u] for u in users],
        degenerate=flagged,
    )
