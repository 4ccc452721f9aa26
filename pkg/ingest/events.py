"""Course event logs: parsing, validation and ordering.

The input is JSON Lines, one event object per line::

    {"kind": "submit", "course_id": "c1", "user_id": "u1", "page_id": "p1",
     "question_id": "q1", "timestamp": 100.0, "score_fraction": 1.0}

Malformed lines are tallied by reason and skipped. A log always belongs to a
single course; mixing courses is a fatal validation error.
"""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Literal

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_core import PydanticCustomError

from rtmodel.exceptions import DataValidationError, InputError

logger = structlog.get_logger(__name__)

EventKind = Literal["page_load", "submit"]

# Exact timestamp ties put the page load first
_KIND_RANK: dict[str, int] = {"page_load": 0, "submit": 1}

_FIELD_REASONS: dict[str, str] = {
    "kind": "unknown_kind",
    "timestamp": "bad_timestamp",
    "score_fraction": "bad_score",
}


class RawEvent(BaseModel):
    """One page-load or submit event of a learner."""

    model_config = ConfigDict(frozen=True, extra="ignore")

    kind: EventKind
    course_id: str = Field(min_length=1)
    user_id: str = Field(min_length=1)
    page_id: str = Field(min_length=1)
    question_id: str = ""
    # Strict: JSON booleans and numeric strings are not numbers here
    timestamp: float = Field(ge=0.0, allow_inf_nan=False, strict=True)
    score_fraction: float | None = Field(
        default=None, ge=0.0, le=1.0, allow_inf_nan=False, strict=True
    )

    @model_validator(mode="after")
    def _check_kind_fields(self) -> RawEvent:
        if self.kind == "submit":
            if not self.question_id:
                raise PydanticCustomError("missing_field", "submit without question_id")
            if self.score_fraction is None:
                raise PydanticCustomError("missing_field", "submit without score_fraction")
        elif self.question_id or self.score_fraction is not None:
            raise PydanticCustomError("bad_field", "page_load carries submit-only fields")
        return self

    @property
    def is_submit(self) -> bool:
        return self.kind == "submit"

    def to_record(self) -> dict[str, object]:
        """Return the JSON object written for this event."""
        record: dict[str, object] = {
            "kind": self.kind,
            "course_id": self.course_id,
            "user_id": self.user_id,
            "page_id": self.page_id,
        }
        if self.is_submit:
            record["question_id"] = self.question_id
        record["timestamp"] = self.timestamp
        if self.is_submit:
            record["score_fraction"] = self.score_fraction
        return record


@dataclass(frozen=True, slots=True)
class EventLog:
    """Validated events of one course sorted by (user_id, timestamp).

    Attributes:
        course_id: Course all events belong to ("" for an empty log).
        events: Events ordered by user, then time, page loads before submits on ties.
        rejections: Count of skipped input lines per reason.
    """

    course_id: str
    events: tuple[RawEvent, ...] = ()
    rejections: Mapping[str, int] = field(default_factory=dict)

    @property
    def accepted(self) -> int:
        return len(self.events)

    @property
    def rejected(self) -> int:
        return sum(self.rejections.values())

    def users(self) -> tuple[str, ...]:
        """Distinct user ids in sorted order."""
        return tuple(sorted({e.user_id for e in self.events}))


def _rejection_reason(exc: ValidationError) -> str:
    err = exc.errors()[0]
    if err["type"] in {"missing_field", "bad_field"}:
        return str(err["type"])
    if err["type"] == "missing":
        return "missing_field"
    loc = err["loc"][0] if err["loc"] else ""
    return _FIELD_REASONS.get(str(loc), "bad_field")


def _parse_line(raw: str | bytes) -> RawEvent | str:
    """Return the parsed event, or the rejection reason."""
    try:
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    except UnicodeDecodeError:
        return "bad_encoding"
    if not line.strip():
        return "blank_line"
    try:
        payload = json.loads(line)
    except json.JSONDecodeError:
        return "bad_json"
    if not isinstance(payload, dict):
        return "bad_json"
    try:
        return RawEvent.model_validate(payload)
    except ValidationError as exc:
        return _rejection_reason(exc)


def parse_events(stream: IO[str] | IO[bytes] | Iterable[str | bytes]) -> EventLog:
    """Parse a JSON Lines event stream into a validated, sorted EventLog.

    Every input line is either accepted or rejected with a tallied reason, so
    ``accepted + rejected`` equals the number of lines read.

    Raises:
        InputError: The stream cannot be read. A text stream that fails to
            decode is unreadable; an undecodable line of a byte stream is
            rejected as ``bad_encoding``.
        DataValidationError: Accepted events belong to more than one course.
    """
    events: list[RawEvent] = []
    rejections: Counter[str] = Counter()
    try:
        for raw in stream:
            parsed = _parse_line(raw)
            if isinstance(parsed, str):
                rejections[parsed] += 1
            else:
                events.append(parsed)
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read event stream: {exc}") from exc
    log = replace(sort_and_validate(events), rejections=dict(sorted(rejections.items())))
    logger.info(
        "events.parsed",
        course=log.course_id,
        accepted=log.accepted,
        rejected=log.rejected,
        reasons=dict(log.rejections),
    )
    return log


def sort_and_validate(events: Iterable[RawEvent]) -> EventLog:
    """Stable-sort events by (user_id, timestamp) and check they share a course.

    Exact timestamp ties order page loads before submits; otherwise input
    order is preserved, which makes the operation idempotent.
    """
    ordered = sorted(events, key=lambda e: (e.user_id, e.timestamp, _KIND_RANK[e.kind]))
    course_ids = sorted({e.course_id for e in ordered})
    if len(course_ids) > 1:
        raise DataValidationError(f"events from several courses: {', '.join(course_ids)}")
    return EventLog(course_id=course_ids[0] if course_ids else "", events=tuple(ordered))


def serialize_events(log: EventLog) -> str:
    """Write the log back as JSON Lines in the input schema."""
    return "".join(
        json.dumps(e.to_record(), separators=(",", ":")) + "\n" for e in log.events
    )


def read_event_log(path: Path | str) -> EventLog:
    """Parse the JSON Lines file at ``path``."""
    try:
        with Path(path).open("rb") as fh:
            return parse_events(fh)
    except OSError as exc:
        raise InputError(f"cannot open event file {path}: {exc}") from exc
