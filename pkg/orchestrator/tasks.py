"""Celery tasks wrapping the pipeline stages, and the job dispatcher.

Includes:

- one ``shared_task`` per stage in :mod:`orchestrator.stages`;
- ``run_jobs``: runs a batch of stage calls through a Celery ``group`` when a
  broker is configured, through a process pool when more than one job is
  allowed locally, and sequentially otherwise. Results always come back in
  submission order.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import structlog
from celery import group, shared_task
from django.conf import settings

from . import stages

logger = structlog.get_logger(__name__)


@shared_task
def extract_course(*args: Any, **kwargs: Any) -> dict[str, object]:
    return stages.extract_course(*args, **kwargs)


@shared_task
def qualify_course(*args: Any, **kwargs: Any) -> dict[str, object]:
    return stages.qualify_course(*args, **kwargs)


@shared_task
def fit_subset(*args: Any, **kwargs: Any) -> dict[str, object]:
    return stages.fit_subset(*args, **kwargs)


@shared_task
def diagnose_subset(*args: Any, **kwargs: Any) -> dict[str, object]:
    return stages.diagnose_subset(*args, **kwargs)


@shared_task
def compare_course_fits(*args: Any, **kwargs: Any) -> dict[str, object]:
    return stages.compare_course_fits(*args, **kwargs)


@shared_task
def simulate_course(*args: Any, **kwargs: Any) -> dict[str, object]:
    return stages.simulate_course(*args, **kwargs)


_STAGE_FUNCTIONS: dict[str, Callable[..., dict[str, object]]] = {
    "extract_course": stages.extract_course,
    "qualify_course": stages.qualify_course,
    "fit_subset": stages.fit_subset,
    "diagnose_subset": stages.diagnose_subset,
    "compare_course_fits": stages.compare_course_fits,
    "simulate_course": stages.simulate_course,
}

_STAGE_TASKS = {
    "extract_course": extract_course,
    "qualify_course": qualify_course,
    "fit_subset": fit_subset,
    "diagnose_subset": diagnose_subset,
    "compare_course_fits": compare_course_fits,
    "simulate_course": simulate_course,
}


def _init_worker() -> None:  # pragma: no cover - runs in pool workers
    import django  # pylint: disable=import-outside-toplevel

    django.setup()


def _call(stage: str, args: Sequence[Any]) -> dict[str, object]:
    return _STAGE_FUNCTIONS[stage](*args)


def run_jobs(stage: str, calls: Sequence[Sequence[Any]], jobs: int = 1) -> list[dict[str, object]]:
    """Run ``stage`` once per argument tuple in ``calls``.

    Raises:
        KeyError: Unknown stage name.
        RtModelError: Re-raised from the first failing call.
    """
    function = _STAGE_FUNCTIONS[stage]
    if not calls:
        return []
    mode = "sequential"
    if jobs > 1 and len(calls) > 1:
        mode = "celery" if settings.RTMODEL_BROKER_URL else "processes"
    logger.info("jobs.start", stage=stage, calls=len(calls), jobs=jobs, mode=mode)
    if mode == "celery":
        task = _STAGE_TASKS[stage]
        results = group(task.s(*args) for args in calls).apply_async().get()
    elif mode == "processes":
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker) as pool:
            results = list(pool.map(_call, [stage] * len(calls), calls))
    else:
        results = [function(*args) for args in calls]
    logger.info("jobs.done", stage=stage, calls=len(calls))
    return list(results)
