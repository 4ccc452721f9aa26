"""Shared base of the pipeline management commands.

Every command accepts ``--config``, ``--out``, ``--jobs`` and ``--seed``,
builds a :class:`RunConfig` and reports domain errors with their exit code
(1 input, 2 validation, 3 configuration).
"""

from __future__ import annotations

import json
from argparse import ArgumentParser
from pathlib import Path
from typing import Any

import structlog
from django.core.management.base import BaseCommand, CommandError

from orchestrator.stages import subset_names
from rtmodel.exceptions import RtModelError

from .config import RunConfig

logger = structlog.get_logger(__name__)


class PipelineCommand(BaseCommand):
    """Base class; subclasses implement :meth:`run` and may add arguments."""

    requires_system_checks: list[str] = []

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--config", type=Path, help="Run configuration JSON file")
        parser.add_argument("--out", type=Path, help="Output directory")
        parser.add_argument("--jobs", type=int, help="Parallel courses/subsets")
        parser.add_argument("--seed", type=int, help="Random seed")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser: ArgumentParser) -> None:
        """Hook for command-specific flags."""

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        """Config values taken from command-specific flags."""
        return {}

    def run(self, cfg: RunConfig, options: dict[str, Any]) -> dict[str, object]:
        raise NotImplementedError

    def handle(self, *args: Any, **options: Any) -> None:
        command = self.__module__.rsplit(".", 1)[-1]
        flags = {key: options.get(key) for key in ("out", "jobs", "seed")}
        flags.update(self.overrides(options))
        overrides = {k: v for k, v in flags.items() if v is not None and v != {}}
        try:
            cfg = RunConfig.load(options.get("config"), overrides)
            logger.info("command.start", command=command, out=str(cfg.out), jobs=cfg.jobs)
            summary = self.run(cfg, options)
        except RtModelError as exc:
            logger.error("command.failed", command=command, error=str(exc), exit_code=exc.exit_code)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        logger.info("command.done", command=command)
        self.stdout.write(json.dumps(summary, sort_keys=True, default=str))

    @staticmethod
    def subsets(cfg: RunConfig) -> tuple[str, ...]:
        return subset_names(cfg.subsets)

    @staticmethod
    def course_dirs(cfg: RunConfig, marker: str = "observations.csv") -> list[Path]:
        """Course directories under the output tree holding ``marker``."""
        if not cfg.out.is_dir():
            return []
        return sorted(p for p in cfg.out.iterdir() if (p / marker).is_file())
