"""Django app configuration for the pipeline commands."""

from __future__ import annotations

from django.apps import AppConfig


class PipelineConfig(AppConfig):
    """AppConfig hosting the ``extract`` … ``outcomes`` management commands."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.pipeline"
    verbose_name = "Response-time pipeline"
