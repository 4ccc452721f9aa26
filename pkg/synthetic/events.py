"""Render a synthetic truth as a raw course event log.

Every user loads every page in order. On each page the user submits the
questions they answered, in question order, each submit following the
previous one (or the page load) by exactly the sampled response time.
"""

from __future__ import annotations

import math

import numpy as np

from cohort.structure import CourseStructure
from ingest.events import EventLog, RawEvent, sort_and_validate
from rtmodel.exceptions import ConfigurationError

from .generator import SynthTruth

LOG_ORIGIN = 1.5e9
PAGE_GAP_SECONDS = 60.0


def page_layout(
    n_questions: int, questions_per_page: int, pages_per_course: int | None = None
) -> list[range]:
    """Question column ranges of each page.

    Raises:
        ConfigurationError: The page count does not fit the questions.
    """
    if questions_per_page < 1:
        raise ConfigurationError("questions_per_page must be at least 1")
    needed = math.ceil(n_questions / questions_per_page)
    if pages_per_course is not None and pages_per_course != needed:
        raise ConfigurationError(
            f"{n_questions} questions at {questions_per_page} per page need {needed} pages, "
            f"not {pages_per_course}"
        )
    return [
        range(start, min(start + questions_per_page, n_questions))
        for start in range(0, n_questions, questions_per_page)
    ]


def _page_ids(count: int) -> list[str]:
    width = max(len(str(count)), 3)
    return [f"p{k:0{width}d}" for k in range(1, count + 1)]


def course_structure(
    truth: SynthTruth, questions_per_page: int = 1, pages_per_course: int | None = None
) -> CourseStructure:
    """Structure matching :func:`emit_event_log`: one chapter per page."""
    pages = page_layout(truth.matrix.n_questions, questions_per_page, pages_per_course)
    page_ids = _page_ids(len(pages))
    chapter_ids = [f"ch{p[1:]}" for p in page_ids]
    return CourseStructure(
        course_id=truth.course_id,
        chapters=tuple(chapter_ids),
        pages=dict(zip(page_ids, chapter_ids)),
        questions={
            truth.matrix.question_ids[j]: page_id
            for page_id, columns in zip(page_ids, pages)
            for j in columns
        },
    )


def emit_event_log(
    truth: SynthTruth, pages_per_course: int | None = None, questions_per_page: int = 1
) -> EventLog:
    """Page loads and first-attempt full-credit submits reproducing ``truth.times``."""
    matrix = truth.matrix
    pages = page_layout(matrix.n_questions, questions_per_page, pages_per_course)
    page_ids = _page_ids(len(pages))
    cells: dict[tuple[int, int], float] = {
        (int(i), int(j)): float(t) for i, j, t in zip(matrix.rows, matrix.cols, truth.times)
    }
    events: list[RawEvent] = []
    for row, user_id in enumerate(matrix.user_ids):
        clock = LOG_ORIGIN
        for page_id, columns in zip(page_ids, pages):
            events.append(
                RawEvent(
                    kind="page_load",
                    course_id=truth.course_id,
                    user_id=user_id,
                    page_id=page_id,
                    timestamp=clock,
                )
            )
            for col in columns:
                elapsed = cells.get((row, col))
                if elapsed is None:
                    continue
                clock += elapsed
                events.append(
                    RawEvent(
                        kind="submit",
                        course_id=truth.course_id,
                        user_id=user_id,
                        page_id=page_id,
                        question_id=matrix.question_ids[col],
                        timestamp=clock,
                        score_fraction=1.0,
                    )
                )
            clock += PAGE_GAP_SECONDS
    return sort_and_validate(events)


def sampled_times(truth: SynthTruth) -> dict[tuple[str, str], float]:
    """``(user_id, question_id) -> seconds`` of every generated entry."""
    user_ids = np.asarray(truth.matrix.user_ids)
    question_ids = np.asarray(truth.matrix.question_ids)
    return dict(
        zip(
            zip(user_ids[truth.matrix.rows].tolist(), question_ids[truth.matrix.cols].tolist()),
            truth.times.tolist(),
        )
    )
