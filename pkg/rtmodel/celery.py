"""Celery app for distributing per-course and per-subset pipeline stages.

Broker and result backend come from ``RTMODEL_BROKER_URL`` via the Django
settings (``CELERY_*`` keys). Without a broker the app still imports and
``orchestrator.tasks.run_jobs`` never sends work to it.
"""

from __future__ import annotations

import os

from celery import Celery

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "rtmodel.settings")

app = Celery("rtmodel")
app.config_from_object("django.conf:settings", namespace="CELERY")
# One long-running fit per worker at a time, acknowledged on completion
app.conf.update(worker_prefetch_multiplier=1, task_acks_late=True)
app.autodiscover_tasks(["orchestrator"])
