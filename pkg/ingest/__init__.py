"""Event-log ingestion and response-time extraction."""

from .config import ExtractionConfig
from .events import (
    EventLog,
    RawEvent,
    parse_events,
    read_event_log,
    serialize_events,
    sort_and_validate,
)
from .extraction import (
    AttemptIndex,
    PageSession,
    ResponseObservation,
    Submission,
    build_page_sessions,
    extract_log,
    extract_response_times,
    index_attempts,
)

__all__ = [
    "AttemptIndex",
    "EventLog",
    "ExtractionConfig",
    "PageSession",
    "RawEvent",
    "ResponseObservation",
    "Submission",
    "build_page_sessions",
    "extract_log",
    "extract_response_times",
    "index_attempts",
    "parse_events",
    "read_event_log",
    "serialize_events",
    "sort_and_validate",
]
