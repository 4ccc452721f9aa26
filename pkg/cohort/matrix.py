"""Sparse user × question matrices of log response times.

A course yields up to six matrices, one per subset label: attempt (1 or 2)
× correctness (any, correct, incorrect). Each subset is qualified on its own
by pruning questions with too few users and users with too few questions
until neither rule removes anything.
"""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, get_args

import numpy as np
import pandas as pd
import structlog
from scipy import sparse

from ingest.extraction import ResponseObservation
from rtmodel.exceptions import DataValidationError, InputError

from .config import QualificationConfig

logger = structlog.get_logger(__name__)

Correctness = Literal["any", "correct", "incorrect"]


@dataclass(frozen=True, slots=True, order=True)
class SubsetLabel:
    """Attempt number × correctness selection of one matrix."""

    attempt: int
    correctness: Correctness

    @property
    def name(self) -> str:
        return f"{self.attempt}_{self.correctness}"

    @classmethod
    def parse(cls, name: str) -> SubsetLabel:
        attempt, _, correctness = name.partition("_")
        if attempt not in {"1", "2"} or correctness not in get_args(Correctness):
            raise ValueError(f"unknown subset label {name!r}")
        return cls(int(attempt), correctness)  # type: ignore[arg-type]

    def admits(self, obs: ResponseObservation) -> bool:
        if obs.attempt != self.attempt:
            return False
        if self.correctness == "any":
            return True
        return obs.correct == (self.correctness == "correct")


SUBSET_LABELS: tuple[SubsetLabel, ...] = tuple(
    SubsetLabel(attempt, correctness)  # type: ignore[arg-type]
    for attempt in (1, 2)
    for correctness in get_args(Correctness)
)


@dataclass(frozen=True, eq=False)
class ResponseMatrix:
    """Observed ``ln t`` entries of a users × questions matrix in coordinate form.

    Attributes:
        label: Subset this matrix was built for.
        user_ids: Row index → user id (sorted).
        question_ids: Column index → question id (sorted).
        rows: Row index of every entry.
        cols: Column index of every entry.
        log_times: Natural log of the response time in seconds of every entry.
        unfittable: Set when qualification left nothing to fit.
        tallies: Filter counts carried into the export sidecar.
    """

    label: SubsetLabel
    user_ids: tuple[str, ...]
    question_ids: tuple[str, ...]
    rows: np.ndarray
    cols: np.ndarray
    log_times: np.ndarray
    unfittable: bool = False
    tallies: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=np.int64)
        cols = np.array(self.cols, dtype=np.int64)
        values = np.array(self.log_times, dtype=np.float64)
        if not rows.shape == cols.shape == values.shape or rows.ndim != 1:
            raise DataValidationError("rows, cols and log_times must be equal-length vectors")
        if not np.all(np.isfinite(values)):
            raise DataValidationError(f"non-finite entries in matrix {self.label.name}")
        n_u, n_q = len(self.user_ids), len(self.question_ids)
        if values.size:
            if rows.min() < 0 or rows.max() >= n_u or cols.min() < 0 or cols.max() >= n_q:
                raise DataValidationError("entry index outside the matrix")
            if np.unique(rows * n_q + cols).size != values.size:
                raise DataValidationError("more than one entry in a matrix cell")
        if np.any(np.bincount(rows, minlength=n_u) == 0) or np.any(
            np.bincount(cols, minlength=n_q) == 0
        ):
            raise DataValidationError(f"empty row or column in matrix {self.label.name}")
        for arr in (rows, cols, values):
            arr.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "log_times", values)
        object.__setattr__(self, "tallies", dict(self.tallies))

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_questions(self) -> int:
        return len(self.question_ids)

    @property
    def n_observations(self) -> int:
        return int(self.log_times.size)

    @property
    def is_empty(self) -> bool:
        return self.n_observations == 0

    @classmethod
    def empty(cls, label: SubsetLabel, tallies: Mapping[str, int] | None = None) -> ResponseMatrix:
        """An unfittable matrix with no rows or columns."""
        none = np.zeros(0, dtype=np.int64)
        return cls(label, (), (), none, none, np.zeros(0), True, dict(tallies or {}))

    @classmethod
    def from_triplets(
        cls,
        label: SubsetLabel,
        triplets: Iterable[tuple[str, str, float]],
        tallies: Mapping[str, int] | None = None,
    ) -> ResponseMatrix:
        """Build a matrix from ``(user_id, question_id, ln_time)`` entries."""
        entries = sorted(triplets)
        if not entries:
            return cls.empty(label, tallies)
        user_ids = tuple(sorted({u for u, _, _ in entries}))
        question_ids = tuple(sorted({q for _, q, _ in entries}))
        user_pos = {u: i for i, u in enumerate(user_ids)}
        question_pos = {q: j for j, q in enumerate(question_ids)}
        return cls(
            label=label,
            user_ids=user_ids,
            question_ids=question_ids,
            rows=np.fromiter((user_pos[u] for u, _, _ in entries), np.int64, len(entries)),
            cols=np.fromiter((question_pos[q] for _, q, _ in entries), np.int64, len(entries)),
            log_times=np.fromiter((v for _, _, v in entries), np.float64, len(entries)),
            tallies=dict(tallies or {}),
        )

    def triplets(self) -> Iterator[tuple[str, str, float]]:
        for i, j, v in zip(self.rows, self.cols, self.log_times):
            yield self.user_ids[i], self.question_ids[j], float(v)

    def to_sparse(self) -> sparse.csr_matrix:
        """Entries as a users × questions CSR matrix (absent cells are structural zeros)."""
        return sparse.csr_matrix(
            (self.log_times, (self.rows, self.cols)), shape=(self.n_users, self.n_questions)
        )

    def to_dense(self) -> np.ndarray:
        """Entries as a dense array with NaN for missing cells."""
        dense = np.full((self.n_users, self.n_questions), np.nan)
        dense[self.rows, self.cols] = self.log_times
        return dense

    def by_question(self, values: np.ndarray) -> dict[str, np.ndarray]:
        """Split a per-entry vector into one group per question."""
        order = np.argsort(self.cols, kind="stable")
        bounds = np.cumsum(np.bincount(self.cols, minlength=self.n_questions))[:-1]
        groups = np.split(np.asarray(values)[order], bounds)
        return dict(zip(self.question_ids, groups))


def qualify_matrix(
    observations: Sequence[ResponseObservation],
    cfg: QualificationConfig,
    label: SubsetLabel = SubsetLabel(1, "any"),
    tallies: Counter[str] | None = None,
) -> ResponseMatrix:
    """Prune a subset's observations to a matrix meeting the user/question minimums.

    Questions answered by fewer than ``min_users_per_question`` users and
    users with fewer than ``min_questions_per_user`` questions are removed
    repeatedly until a fixed point. When no user in the input reaches the
    per-user minimum, the minimum is lowered to the largest per-user count.
    """
    tallies = tallies if tallies is not None else Counter()
    cells: dict[tuple[str, str], float] = {}
    for obs in observations:
        if obs.pair in cells:
            tallies["duplicate_cells"] += 1
            continue
        cells[obs.pair] = float(np.log(obs.response_time))
    if not cells:
        logger.info("cohort.qualified", subset=label.name, unfittable=True)
        return ResponseMatrix.empty(label, tallies)

    full = ResponseMatrix.from_triplets(label, ((u, q, v) for (u, q), v in cells.items()))
    incidence = sparse.csr_matrix(
        (np.ones(full.n_observations), (full.rows, full.cols)),
        shape=(full.n_users, full.n_questions),
    )
    user_cutoff = min(cfg.min_questions_per_user, int(incidence.sum(axis=1).max()))
    tallies["user_cutoff"] = user_cutoff

    keep_users = np.ones(full.n_users, dtype=bool)
    keep_questions = np.ones(full.n_questions, dtype=bool)
    while True:
        active = incidence[keep_users][:, keep_questions]
        q_ok = np.asarray(active.sum(axis=0)).ravel() >= cfg.min_users_per_question
        u_ok = np.asarray(active[:, q_ok].sum(axis=1)).ravel() >= user_cutoff
        if q_ok.all() and u_ok.all():
            break
        keep_questions[np.flatnonzero(keep_questions)[~q_ok]] = False
        keep_users[np.flatnonzero(keep_users)[~u_ok]] = False
        if not keep_users.any() or not keep_questions.any():
            break

    tallies["questions_removed"] = int((~keep_questions).sum())
    tallies["users_removed"] = int((~keep_users).sum())
    mask = keep_users[full.rows] & keep_questions[full.cols]
    matrix = ResponseMatrix.from_triplets(
        label, (t for t, keep in zip(full.triplets(), mask) if keep), tallies
    )
    if matrix.is_empty:
        matrix = ResponseMatrix.empty(label, tallies)
    logger.info(
        "cohort.qualified",
        subset=label.name,
        users=matrix.n_users,
        questions=matrix.n_questions,
        observations=matrix.n_observations,
        unfittable=matrix.unfittable,
    )
    return matrix


def build_subsets(
    observations: Sequence[ResponseObservation],
    cfg: QualificationConfig,
    tallies: Mapping[str, int] | None = None,
) -> dict[SubsetLabel, ResponseMatrix]:
    """Partition filtered observations into the six subsets and qualify each."""
    subsets: dict[SubsetLabel, ResponseMatrix] = {}
    for label in SUBSET_LABELS:
        subset_tallies: Counter[str] = Counter(tallies or {})
        members = [obs for obs in observations if label.admits(obs)]
        subsets[label] = qualify_matrix(members, cfg, label, subset_tallies)
    return subsets


def write_matrix(matrix: ResponseMatrix, directory: Path) -> None:
    """Write ``matrix.csv`` triplets and the ``matrix.json`` sidecar."""
    directory.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(matrix.triplets()), columns=["user_id", "question_id", "ln_time"])
    frame.to_csv(directory / "matrix.csv", index=False)
    sidecar = {
        "subset": matrix.label.name,
        "attempt": matrix.label.attempt,
        "correctness": matrix.label.correctness,
        "n_users": matrix.n_users,
        "n_questions": matrix.n_questions,
        "n_observations": matrix.n_observations,
        "unfittable": matrix.unfittable,
        "tallies": dict(sorted(matrix.tallies.items())),
    }
    (directory / "matrix.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_matrix(directory: Path) -> ResponseMatrix:
    """Read a matrix written by :func:`write_matrix`."""
    try:
        sidecar = json.loads((directory / "matrix.json").read_text(encoding="utf-8"))
        frame = pd.read_csv(
            directory / "matrix.csv",
            dtype={"user_id": str, "question_id": str},
            keep_default_na=False,
        )
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix in {directory}: {exc}") from exc
    label = SubsetLabel.parse(sidecar["subset"])
    matrix = ResponseMatrix.from_triplets(
        label,
        ((u, q, float(v)) for u, q, v in frame.itertuples(index=False)),
        sidecar.get("tallies", {}),
    )
    if sidecar.get("unfittable") and not matrix.unfittable:
        return ResponseMatrix.empty(label, matrix.tallies)
    return matrix
