"""Observation-level qualification filters.

Applied in order by :func:`prepare_observations`: explored learners only,
then the attempt cap on whole (user, question) instances, then removal of
second responses that follow a correct first response.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import replace

import structlog

from ingest.extraction import ResponseObservation

from .config import QualificationConfig

logger = structlog.get_logger(__name__)


def restrict_to_users(
    observations: Iterable[ResponseObservation],
    users: frozenset[str],
    tallies: Counter[str] | None = None,
) -> list[ResponseObservation]:
    """Keep observations of the given users only."""
    tallies = tallies if tallies is not None else Counter()
    kept = []
    for obs in observations:
        if obs.user_id in users:
            kept.append(obs)
        else:
            tallies["unexplored_user"] += 1
    return kept


def apply_attempt_cap(
    observations: Iterable[ResponseObservation],
    attempt_counts: Mapping[tuple[str, str], int],
    cfg: QualificationConfig,
    tallies: Counter[str] | None = None,
) -> list[ResponseObservation]:
    """Drop every observation of a (user, question) with more than ``max_attempts`` submits."""
    tallies = tallies if tallies is not None else Counter()
    kept = []
    for obs in observations:
        if attempt_counts.get(obs.pair, obs.attempt) > cfg.max_attempts:
            tallies["over_attempt_cap"] += 1
        else:
            kept.append(obs)
    return kept


def drop_post_correct_seconds(
    observations: Sequence[ResponseObservation],
    cfg: QualificationConfig,
    tallies: Counter[str] | None = None,
) -> list[ResponseObservation]:
    """Remove second responses whose first response was correct or is not on record.

    A first response is correct when its score reaches
    ``cfg.full_credit_threshold``; observations read back from CSV carry no
    score and keep the flag set at extraction.
    """
    tallies = tallies if tallies is not None else Counter()
    threshold = cfg.full_credit_threshold
    first_correct = {
        obs.pair: obs.correct_at(threshold) for obs in observations if obs.attempt == 1
    }
    kept = []
    for obs in observations:
        if obs.attempt == 2:
            if obs.pair not in first_correct:
                tallies["second_without_first"] += 1
                continue
            if first_correct[obs.pair]:
                tallies["post_correct_second"] += 1
                continue
        kept.append(obs)
    return kept


def prepare_observations(
    observations: Sequence[ResponseObservation],
    attempt_counts: Mapping[tuple[str, str], int],
    cfg: QualificationConfig,
    explored: frozenset[str] | None = None,
    tallies: Counter[str] | None = None,
) -> list[ResponseObservation]:
    """Run the explored, attempt-cap and post-correct filters in order.

    ``explored=None`` skips the explored-learner rule (no course structure).
    """
    tallies = tallies if tallies is not None else Counter()
    # Subsets split on the same correctness the post-correct filter uses
    kept = [replace(obs, correct=obs.correct_at(cfg.full_credit_threshold)) for obs in observations]
    if explored is not None:
        kept = restrict_to_users(kept, explored, tallies)
    kept = apply_attempt_cap(kept, attempt_counts, cfg, tallies)
    kept = drop_post_correct_seconds(kept, cfg, tallies)
    logger.info("cohort.filtered", before=len(observations), after=len(kept), **tallies)
    return kept
