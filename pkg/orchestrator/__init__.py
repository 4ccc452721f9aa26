"""Orchestrator package: per-course pipeline stages and their Celery tasks."""
