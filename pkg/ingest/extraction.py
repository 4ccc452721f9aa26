"""Response-time extraction from a validated event log.

Submits are grouped into page sessions: each submit belongs to the most
recent preceding load of its page by the same user. Within a session the load
and all submits form a chain ``t_0 <= t_1 <= ... <= t_p`` regardless of which
question a submit is for. A question first answered at ``t_i`` gets the
first-attempt response time ``t_i - t_(i-1)``: the learner is assumed to
start on it after the previous submit on the page.

The second-attempt response time is the gap between the first and second
submit of the same question, wherever those submits happen. Later attempts
are counted but never produce observations. No upper timeout is applied.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import pandas as pd
import structlog

from rtmodel.exceptions import InputError

from .events import EventLog, RawEvent

logger = structlog.get_logger(__name__)

FirstResponseRule = Literal["chain", "page_load"]

OBSERVATION_COLUMNS = [
    "user_id",
    "question_id",
    "attempt",
    "response_time_s",
    "correct",
    "submit_ts",
]


@dataclass(frozen=True, slots=True)
class Submission:
    """A submit click placed in its per-(user, question) attempt order."""

    question_id: str
    timestamp: float
    score_fraction: float
    attempt: int


@dataclass(frozen=True, slots=True)
class PageSession:
    """One page load of a user and the submits attributed to it, in time order."""

    user_id: str
    page_id: str
    load_timestamp: float
    submits: tuple[Submission, ...]

    def chain(self) -> tuple[float, ...]:
        """Timestamps ``t_0, t_1, ..., t_p`` of the session."""
        return (self.load_timestamp, *(s.timestamp for s in self.submits))


@dataclass(frozen=True, slots=True)
class ResponseObservation:
    """Response time of one (user, question, attempt)."""

    user_id: str
    question_id: str
    attempt: int
    response_time: float
    correct: bool
    submit_timestamp: float
    score_fraction: float | None = None

    def __post_init__(self) -> None:
        if self.attempt < 1:
            raise ValueError(f"attempt must be >= 1, got {self.attempt}")
        if not self.response_time > 0:
            raise ValueError(f"response_time must be > 0, got {self.response_time}")

    @property
    def pair(self) -> tuple[str, str]:
        return (self.user_id, self.question_id)

    def correct_at(self, threshold: float) -> bool:
        """Correctness under ``threshold``; the recorded flag when the score is unknown."""
        if self.score_fraction is None:
            return self.correct
        return self.score_fraction >= threshold


class AttemptIndex(Mapping[tuple[str, str], tuple[Submission, ...]]):
    """Time-ordered submits per (user, question) across the whole log."""

    def __init__(self, submits: Mapping[tuple[str, str], Sequence[Submission]]) -> None:
        self._submits = {pair: tuple(items) for pair, items in submits.items()}

    def __getitem__(self, pair: tuple[str, str]) -> tuple[Submission, ...]:
        return self._submits[pair]

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(sorted(self._submits))

    def __len__(self) -> int:
        return len(self._submits)

    def submit_count(self, user_id: str, question_id: str) -> int:
        return len(self._submits.get((user_id, question_id), ()))

    def counts(self) -> dict[tuple[str, str], int]:
        """Total submit count per pair."""
        return {pair: len(self._submits[pair]) for pair in self}


def _numbered_submits(log: EventLog) -> Iterator[tuple[RawEvent, int]]:
    seen: Counter[tuple[str, str]] = Counter()
    for event in log.events:
        if event.is_submit:
            seen[(event.user_id, event.question_id)] += 1
            yield event, seen[(event.user_id, event.question_id)]


def _submission(event: RawEvent, attempt: int) -> Submission:
    return Submission(
        question_id=event.question_id,
        timestamp=event.timestamp,
        score_fraction=float(event.score_fraction or 0.0),
        attempt=attempt,
    )


def index_attempts(log: EventLog) -> AttemptIndex:
    """Number every submit per (user, question) in time order, orphans included."""
    submits: dict[tuple[str, str], list[Submission]] = defaultdict(list)
    for event, attempt in _numbered_submits(log):
        submits[(event.user_id, event.question_id)].append(_submission(event, attempt))
    return AttemptIndex(submits)


def build_page_sessions(
    log: EventLog, tallies: Counter[str] | None = None
) -> tuple[PageSession, ...]:
    """Attribute each submit to the latest earlier load of its page by the same user.

    A new load of the same page starts a new session. Submits with no
    preceding load are skipped and tallied as ``orphan_submits``.
    """
    tallies = tallies if tallies is not None else Counter()
    attempts = {id(event): attempt for event, attempt in _numbered_submits(log)}
    sessions: list[PageSession] = []
    open_sessions: dict[tuple[str, str], tuple[float, list[Submission]]] = {}

    def close(key: tuple[str, str]) -> None:
        load_ts, submits = open_sessions.pop(key)
        sessions.append(PageSession(key[0], key[1], load_ts, tuple(submits)))

    for event in log.events:
        key = (event.user_id, event.page_id)
        if not event.is_submit:
            if key in open_sessions:
                close(key)
            open_sessions[key] = (event.timestamp, [])
        elif key in open_sessions:
            open_sessions[key][1].append(_submission(event, attempts[id(event)]))
        else:
            tallies["orphan_submits"] += 1
    for key in list(open_sessions):
        close(key)

    sessions.sort(key=lambda s: (s.user_id, s.load_timestamp, s.page_id))
    logger.debug("extract.sessions", sessions=len(sessions), orphans=tallies["orphan_submits"])
    return tuple(sessions)


def extract_response_times(
    sessions: Iterable[PageSession],
    attempts: AttemptIndex,
    *,
    rule: FirstResponseRule = "chain",
    full_credit_threshold: float = 1.0,
    tallies: Counter[str] | None = None,
) -> tuple[ResponseObservation, ...]:
    """Turn page sessions and the attempt index into response-time observations.

    Args:
        sessions: Page sessions from :func:`build_page_sessions`.
        attempts: Submit index from :func:`index_attempts` over the same log.
        rule: ``chain`` measures a first response from the previous submit on
            the page; ``page_load`` measures it from the page load itself.
        full_credit_threshold: Score at or above which a submit is correct.
        tallies: Optional counter receiving ``non_positive``, ``out_of_order``
            and ``beyond_second_attempt`` counts.

    Returns:
        Observations sorted by (user_id, question_id, attempt).
    """
    tallies = tallies if tallies is not None else Counter()
    observations: list[ResponseObservation] = []

    def emit(user: str, sub: Submission, elapsed: float) -> None:
        if elapsed <= 0:
            tallies["non_positive"] += 1
            return
        observations.append(
            ResponseObservation(
                user_id=user,
                question_id=sub.question_id,
                attempt=sub.attempt,
                response_time=elapsed,
                correct=sub.score_fraction >= full_credit_threshold,
                submit_timestamp=sub.timestamp,
                score_fraction=sub.score_fraction,
            )
        )

    for session in sessions:
        chain = session.chain()
        for i, sub in enumerate(session.submits, start=1):
            if sub.attempt == 1:
                start = chain[i - 1] if rule == "chain" else chain[0]
                emit(session.user_id, sub, chain[i] - start)

    for (user, _question), submits in attempts.items():
        if len(submits) > 2:
            tallies["beyond_second_attempt"] += len(submits) - 2
        if len(submits) < 2:
            continue
        first, second = submits[0], submits[1]
        # Only an index not built by index_attempts can break this order
        if first.attempt != 1 or second.timestamp < first.timestamp:
            tallies["out_of_order"] += 1
            continue
        emit(user, second, second.timestamp - first.timestamp)

    observations.sort(key=lambda o: (o.user_id, o.question_id, o.attempt))
    return tuple(observations)


def extract_log(
    log: EventLog,
    *,
    rule: FirstResponseRule = "chain",
    full_credit_threshold: float = 1.0,
) -> tuple[tuple[ResponseObservation, ...], AttemptIndex, dict[str, int]]:
    """Run session building and extraction over a whole log.

    Returns the observations, the attempt index and the extraction tallies.
    """
    tallies: Counter[str] = Counter()
    sessions = build_page_sessions(log, tallies)
    attempts = index_attempts(log)
    observations = extract_response_times(
        sessions,
        attempts,
        rule=rule,
        full_credit_threshold=full_credit_threshold,
        tallies=tallies,
    )
    logger.info(
        "extract.done",
        course=log.course_id,
        sessions=len(sessions),
        observations=len(observations),
        tallies=dict(tallies),
    )
    return observations, attempts, dict(sorted(tallies.items()))


def write_observations_csv(observations: Iterable[ResponseObservation], path: Path) -> None:
    """Write observations with the ``user_id,question_id,attempt,...`` header."""
    frame = pd.DataFrame(
        [
            (o.user_id, o.question_id, o.attempt, o.response_time, o.correct, o.submit_timestamp)
            for o in observations
        ],
        columns=OBSERVATION_COLUMNS,
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)


def read_observations_csv(path: Path) -> tuple[ResponseObservation, ...]:
    """Read observations written by :func:`write_observations_csv`.

    The file holds the dichotomized ``correct`` flag only, so ``score_fraction``
    comes back as ``None``.
    """
    try:
        frame = pd.read_csv(
            path, dtype={"user_id": str, "question_id": str}, keep_default_na=False
        )
    except OSError as exc:
        raise InputError(f"cannot read observations {path}: {exc}") from exc
    return tuple(
        ResponseObservation(
            user_id=row.user_id,
            question_id=row.question_id,
            attempt=int(row.attempt),
            response_time=float(row.response_time_s),
            correct=str(row.correct) == "True",
            submit_timestamp=float(row.submit_ts),
        )
        for row in frame.itertuples(index=False)
    )


def write_attempt_counts(attempts: AttemptIndex, path: Path) -> None:
    """Write total submit counts per (user, question)."""
    frame = pd.DataFrame(
        [(user, question, count) for (user, question), count in attempts.counts().items()],
        columns=["user_id", "question_id", "submits"],
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)


def read_attempt_counts(path: Path) -> dict[tuple[str, str], int]:
    try:
        frame = pd.read_csv(
            path, dtype={"user_id": str, "question_id": str}, keep_default_na=False
        )
    except OSError as exc:
        raise InputError(f"cannot read attempt counts {path}: {exc}") from exc
    return {
        (row.user_id, row.question_id): int(row.submits) for row in frame.itertuples(index=False)
    }
