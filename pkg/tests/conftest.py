from __future__ import annotations

import json
import math
import os
from collections.abc import Callable
from pathlib import Path

import django
import numpy as np
import pytest

from cohort.matrix import ResponseMatrix, SubsetLabel
from ingest.events import EventLog, RawEvent, sort_and_validate
from lognormal.params import ModelParams


@pytest.fixture(scope="session", autouse=True)
def django_setup() -> None:
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "rtmodel.settings")
    django.setup()


def load(user: str, page: str, ts: float, course: str = "c1") -> RawEvent:
    return RawEvent(kind="page_load", course_id=course, user_id=user, page_id=page, timestamp=ts)


def submit(
    user: str, page: str, question: str, ts: float, score: float = 1.0, course: str = "c1"
) -> RawEvent:
    return RawEvent(
        kind="submit",
        course_id=course,
        user_id=user,
        page_id=page,
        question_id=question,
        timestamp=ts,
        score_fraction=score,
    )


def params(
    question_ids: tuple[str, ...],
    user_ids: tuple[str, ...],
    alpha: list[float],
    beta: list[float],
    zeta: list[float],
) -> ModelParams:
    return ModelParams(question_ids, user_ids, np.array(alpha), np.array(beta), np.array(zeta))


def dense_matrix(log_times: list[list[float]], label: SubsetLabel | None = None) -> ResponseMatrix:
    """Matrix from a users × questions list of ln t values (NaN marks a missing cell)."""
    values = np.asarray(log_times, dtype=np.float64)
    rows, cols = np.nonzero(~np.isnan(values))
    return ResponseMatrix(
        label=label or SubsetLabel(1, "any"),
        user_ids=tuple(f"u{i}" for i in range(values.shape[0])),
        question_ids=tuple(f"q{j}" for j in range(values.shape[1])),
        rows=rows,
        cols=cols,
        log_times=values[rows, cols],
    )


@pytest.fixture
def worked_session_log() -> EventLog:
    """One page, load at 0, then A@50, B@120, A@140."""
    return sort_and_validate(
        [
            load("u1", "p1", 0.0),
            submit("u1", "p1", "A", 50.0, score=0.0),
            submit("u1", "p1", "B", 120.0),
            submit("u1", "p1", "A", 140.0),
        ]
    )


@pytest.fixture
def additive_matrix() -> ResponseMatrix:
    return dense_matrix([[1.0, 2.0], [3.0, 4.0]])


@pytest.fixture
def random_matrix() -> Callable[[int, int, int, float], ResponseMatrix]:
    """Factory of random matrices with every row and column observed."""

    def build(n_users: int, n_questions: int, seed: int, missing: float = 0.2) -> ResponseMatrix:
        rng = np.random.default_rng(seed)
        values = rng.normal(4.0, 1.0, (n_users, n_questions)) + rng.normal(0, 0.5, (n_users, 1))
        mask = rng.random((n_users, n_questions)) < missing
        mask[np.arange(n_users), np.arange(n_users) % n_questions] = False
        mask[np.arange(n_questions) % n_users, np.arange(n_questions)] = False
        values[mask] = math.nan
        return dense_matrix(values.tolist())

    return build


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[dict[str, object]], Path]:
    def write(payload: dict[str, object]) -> Path:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write
