"""Per-learner covariates and outcomes read from CSV."""

from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path

import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from rtmodel.exceptions import DataValidationError, InputError

logger = structlog.get_logger(__name__)

LEARNER_COLUMNS = (
    "course_id",
    "user_id",
    "zeta1",
    "zeta2",
    "correctness",
    "education",
    "age",
    "videos",
    "play_clicks",
    "posts",
    "grade",
    "completed",
    "certified",
)


class LearnerRecord(BaseModel):
    """One learner of one course.

    ``education`` codes 0 (none) to 7 (doctorate). ``zeta1``/``zeta2`` are the
    slowness values of the first- and second-attempt fits and may be filled
    in later from fitted parameters.
    """

    model_config = ConfigDict(frozen=True, extra="ignore")

    course_id: str = Field(min_length=1)
    user_id: str = Field(min_length=1)
    zeta1: float | None = None
    zeta2: float | None = None
    correctness: float = Field(ge=0.0, le=1.0)
    education: int = Field(ge=0, le=7)
    age: float = Field(ge=0.0)
    videos: float = Field(ge=0.0)
    play_clicks: float = Field(ge=0.0)
    posts: float = Field(ge=0.0)
    grade: float = Field(ge=0.0, le=1.0)
    completed: bool
    certified: bool


def read_learner_records(path: Path | str) -> tuple[LearnerRecord, ...]:
    """Read and validate a learner CSV.

    Raises:
        InputError: The file cannot be read.
        DataValidationError: A required column is missing or a row is invalid.
    """
    try:
        frame = pd.read_csv(path, dtype={"course_id": str, "user_id": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise InputError(f"cannot read learner records {path}: {exc}") from exc
    required = [c for c in LEARNER_COLUMNS if c not in {"zeta1", "zeta2"}]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataValidationError(f"learner records {path} lack columns: {', '.join(missing)}")
    rows = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
    records: list[LearnerRecord] = []
    for line, row in enumerate(rows, start=2):
        try:
            records.append(LearnerRecord.model_validate(row))
        except ValidationError as exc:
            raise DataValidationError(f"{path}:{line}: {exc.errors()[0]['msg']}") from exc
    logger.info("outcomes.records_read", path=str(path), records=len(records))
    return tuple(records)


def learner_frame(records: Iterable[LearnerRecord]) -> pd.DataFrame:
    """Records as a DataFrame with one column per field; absent slowness is NaN."""
    frame = pd.DataFrame(
        [r.model_dump() for r in records], columns=list(LEARNER_COLUMNS)
    )
    for column in ("zeta1", "zeta2"):
        frame[column] = pd.to_numeric(frame[column], errors="coerce").astype(float)
    return frame
