"""rtmodel: response-time modelling for online-course assessments.

The Django project package. Importing it loads the Celery app so that
``celery -A rtmodel worker`` finds the pipeline tasks.
"""

from __future__ import annotations

from .celery import app as celery_app

# Keep in sync with project.version in pyproject.toml
__version__ = "0.1.0"

__all__ = ["__version__", "celery_app"]
