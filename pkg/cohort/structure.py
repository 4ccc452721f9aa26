"""Course structure and the explored-learner rule.

A learner has explored a course when their page loads touch at least
``ceil(explored_fraction * chapters)`` distinct chapters.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from pathlib import Path

import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from ingest.events import EventLog
from rtmodel.exceptions import ConfigurationError, InputError

from .config import QualificationConfig

logger = structlog.get_logger(__name__)


class CourseStructure(BaseModel):
    """Chapter → page → question layout of one course."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    course_id: str
    chapters: tuple[str, ...]
    pages: dict[str, str]
    questions: dict[str, str] = {}

    @model_validator(mode="after")
    def _check_mapping(self) -> CourseStructure:
        known = set(self.chapters)
        bad_pages = sorted(p for p, ch in self.pages.items() if ch not in known)
        if bad_pages:
            raise ValueError(f"pages mapped to unknown chapters: {bad_pages}")
        bad_questions = sorted(q for q, p in self.questions.items() if p not in self.pages)
        if bad_questions:
            raise ValueError(f"questions mapped to unknown pages: {bad_questions}")
        return self

    @classmethod
    def load(cls, path: Path | str) -> CourseStructure:
        """Read a structure JSON file."""
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read course structure {path}: {exc}") from exc
        try:
            return cls.model_validate(payload)
        except ValidationError as exc:
            raise ConfigurationError(f"invalid course structure {path}: {exc}") from exc

    def dump(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


def required_chapters(structure: CourseStructure, cfg: QualificationConfig) -> int:
    """Number of distinct chapters an explored learner must have visited."""
    if not structure.chapters:
        raise ConfigurationError(f"course {structure.course_id} has no chapters")
    # rounding keeps 0.3 * 10 at 3 rather than 3.0000000000000004
    return math.ceil(round(cfg.explored_fraction * len(structure.chapters), 9))


def chapter_visits(
    log: EventLog, structure: CourseStructure, tallies: Counter[str] | None = None
) -> dict[str, int]:
    """Distinct chapters reached by page loads, per user."""
    tallies = tallies if tallies is not None else Counter()
    visited: defaultdict[str, set[str]] = defaultdict(set)
    for event in log.events:
        if event.is_submit:
            continue
        chapter = structure.pages.get(event.page_id)
        if chapter is None:
            tallies["unmapped_page_loads"] += 1
            continue
        visited[event.user_id].add(chapter)
    return {user: len(chapters) for user, chapters in sorted(visited.items())}


def filter_explored(
    log: EventLog,
    structure: CourseStructure,
    cfg: QualificationConfig,
    tallies: Counter[str] | None = None,
) -> frozenset[str]:
    """Return the users who explored the course.

    Raises:
        ConfigurationError: The structure lists no chapters.
    """
    need = required_chapters(structure, cfg)
    visits = chapter_visits(log, structure, tallies)
    explored = frozenset(user for user, n in visits.items() if n >= need)
    logger.info(
        "cohort.explored",
        course=structure.course_id,
        required=need,
        users=len(visits),
        explored=len(explored),
    )
    return explored


def write_chapter_visits(visits: dict[str, int], required: int, path: Path) -> None:
    """Write ``user_id,chapters_visited,explored`` rows."""
    frame = pd.DataFrame(
        [(user, n, n >= required) for user, n in visits.items()],
        columns=["user_id", "chapters_visited", "explored"],
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)


def read_explored_users(path: Path) -> frozenset[str]:
    try:
        frame = pd.read_csv(path, dtype={"user_id": str}, keep_default_na=False)
    except OSError as exc:
        raise InputError(f"cannot read users file {path}: {exc}") from exc
    return frozenset(frame.loc[frame["explored"].astype(str) == "True", "user_id"])
