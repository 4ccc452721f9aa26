"""Django settings for the rtmodel project.

The project has no web surface; Django hosts the management commands that
make up the command line, and these settings carry logging and the optional
Celery broker. Environment variables may override defaults; see env.example.
"""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

import structlog
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv()  # Load from .env if present

SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "rtmodel-cli-only-no-web-surface")
DEBUG = os.getenv("RTMODEL_DEBUG", "0").lower() in {"1", "true", "yes", "on"}
ALLOWED_HOSTS: list[str] = []

# Logging level (controls structlog and stdlib loggers)
LOG_LEVEL_NAME = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_LEVEL = getattr(logging, LOG_LEVEL_NAME, logging.INFO)

INSTALLED_APPS = [
    # First-party
    "apps.pipeline",
]

# No models are stored; commands read and write plain files.
DATABASES: dict[str, dict[str, object]] = {}

TIME_ZONE = "UTC"
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


def _int_env(name: str, default: int) -> int:
    try:
        return max(1, int(os.getenv(name, str(default))))
    except ValueError:
        return default


# Default degree of parallelism for per-course / per-subset work
RTMODEL_JOBS = _int_env("RTMODEL_JOBS", 1)

# Celery (optional). Without a broker every task runs in-process.
RTMODEL_BROKER_URL = os.getenv("RTMODEL_BROKER_URL", "")
CELERY_BROKER_URL = RTMODEL_BROKER_URL or "memory://"
CELERY_RESULT_BACKEND = RTMODEL_BROKER_URL or "cache+memory://"
CELERY_TIMEZONE = TIME_ZONE
CELERY_TASK_ALWAYS_EAGER = False
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"

# Structlog configuration
structlog.configure(
    processors=[
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.add_log_level,
        (structlog.dev.ConsoleRenderer() if DEBUG else structlog.processors.JSONRenderer()),
    ],
    wrapper_class=structlog.make_filtering_bound_logger(LOG_LEVEL),
    context_class=dict,
    logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
    cache_logger_on_first_use=True,
)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "standard": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        }
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "standard",
        }
    },
    "loggers": {
        "django": {"handlers": ["console"], "level": LOG_LEVEL_NAME},
        "celery": {"handlers": ["console"], "level": LOG_LEVEL_NAME},
    },
}
