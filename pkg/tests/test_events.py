from __future__ import annotations

import io
import json
from pathlib import Path

import pytest
from conftest import load, submit

from ingest.events import parse_events, read_event_log, serialize_events, sort_and_validate
from rtmodel.exceptions import DataValidationError, InputError

SUBMIT_LINE = (
    '{"kind":"submit","course_id":"c1","user_id":"u1","page_id":"p1",'
    '"question_id":"q1","timestamp":100.0,"score_fraction":1.0}'
)


def test_empty_stream_gives_empty_log() -> None:
    log = parse_events(io.StringIO(""))
    assert log.accepted == 0 and log.rejected == 0
    assert log.course_id == ""


def test_single_submit_line_is_parsed() -> None:
    log = parse_events(io.StringIO(SUBMIT_LINE + "\n"))
    assert log.accepted == 1
    event = log.events[0]
    assert event.is_submit and event.question_id == "q1"
    assert event.timestamp == 100.0 and event.score_fraction == 1.0
    assert log.course_id == "c1"


def test_non_numeric_timestamp_is_rejected() -> None:
    line = SUBMIT_LINE.replace("100.0", '"abc"')
    log = parse_events(io.StringIO(line))
    assert log.accepted == 0
    assert dict(log.rejections) == {"bad_timestamp": 1}


@pytest.mark.parametrize(
    ("payload", "reason"),
    [
        ("not json", "bad_json"),
        (
            '{"kind":"click","course_id":"c1","user_id":"u1","page_id":"p1","timestamp":1}',
            "unknown_kind",
        ),
        ('{"kind":"page_load","course_id":"c1","page_id":"p1","timestamp":1}', "missing_field"),
        (SUBMIT_LINE.replace('"score_fraction":1.0', '"score_fraction":1.5'), "bad_score"),
        (
            '{"kind":"page_load","course_id":"c1","user_id":"u1","page_id":"p1",'
            '"question_id":"q1","timestamp":1}',
            "bad_field",
        ),
        (SUBMIT_LINE.replace('"question_id":"q1",', ""), "missing_field"),
    ],
)
def test_malformed_lines_are_tallied(payload: str, reason: str) -> None:
    log = parse_events(io.StringIO(payload + "\n"))
    assert log.accepted == 0
    assert log.rejections == {reason: 1}


def test_accepted_plus_rejected_equals_lines() -> None:
    lines = [SUBMIT_LINE, "garbage", SUBMIT_LINE.replace("100.0", "-1"), SUBMIT_LINE]
    log = parse_events(io.BytesIO(("\n".join(lines) + "\n").encode("utf-8")))
    assert log.accepted + log.rejected == len(lines)
    assert log.accepted == 2  # exact duplicates are kept


def test_undecodable_line_is_skipped_not_fatal() -> None:
    stream = io.BytesIO(
        SUBMIT_LINE.encode("utf-8")
        + b"\n"
        + b'{"kind":"page_load","course_id":"c1","user_id":"\xff\xfe","page_id":"p1",'
        + b'"timestamp":1}\n'
        + SUBMIT_LINE.replace("100.0", "200.0").encode("utf-8")
        + b"\n"
    )
    log = parse_events(stream)
    assert log.accepted == 2
    assert log.rejections == {"bad_encoding": 1}
    assert [e.timestamp for e in log.events] == [100.0, 200.0]


@pytest.mark.parametrize(
    ("old", "new", "reason"),
    [
        ("100.0", "true", "bad_timestamp"),
        ("100.0", '"12"', "bad_timestamp"),
        ('"score_fraction":1.0', '"score_fraction":true', "bad_score"),
        ('"score_fraction":1.0', '"score_fraction":"1"', "bad_score"),
    ],
)
def test_booleans_and_numeric_strings_are_not_numbers(old: str, new: str, reason: str) -> None:
    log = parse_events(io.StringIO(SUBMIT_LINE.replace(old, new)))
    assert log.accepted == 0
    assert log.rejections == {reason: 1}


def test_integer_timestamp_is_accepted() -> None:
    log = parse_events(io.StringIO(SUBMIT_LINE.replace("100.0", "100")))
    assert log.accepted == 1
    assert log.events[0].timestamp == 100.0


def test_sort_orders_by_user_then_time() -> None:
    log = sort_and_validate([submit("u1", "p1", "q1", 5.0), load("u1", "p1", 3.0)])
    assert [e.kind for e in log.events] == ["page_load", "submit"]


def test_tie_puts_page_load_first() -> None:
    log = sort_and_validate([submit("u1", "p1", "q1", 7.0), load("u1", "p1", 7.0)])
    assert [e.kind for e in log.events] == ["page_load", "submit"]


def test_sort_is_idempotent() -> None:
    events = [
        load("u2", "p1", 1.0),
        submit("u1", "p1", "q1", 9.0),
        load("u1", "p1", 2.0),
        submit("u2", "p1", "q1", 4.0),
    ]
    once = sort_and_validate(events)
    twice = sort_and_validate(once.events)
    assert once.events == twice.events


def test_mixed_courses_are_fatal() -> None:
    with pytest.raises(DataValidationError) as excinfo:
        sort_and_validate([load("u1", "p1", 0.0, course="c1"), load("u1", "p1", 1.0, course="c2")])
    assert "c1" in str(excinfo.value) and "c2" in str(excinfo.value)


def test_serialize_then_parse_round_trips() -> None:
    log = sort_and_validate(
        [
            load("u1", "p1", 0.25),
            submit("u1", "p1", "q1", 12.125, score=0.5),
            load("u2", "p2", 1e9 + 0.1),
        ]
    )
    again = parse_events(io.StringIO(serialize_events(log)))
    assert again.events == log.events
    first = json.loads(serialize_events(log).splitlines()[0])
    assert "question_id" not in first and "score_fraction" not in first


def test_unreadable_path_is_input_error(tmp_path: Path) -> None:
    with pytest.raises(InputError):
        read_event_log(tmp_path / "missing.jsonl")
