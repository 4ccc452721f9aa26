"""Qualify extracted observations into per-subset response matrices."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from apps.pipeline.command import PipelineCommand
from apps.pipeline.config import RunConfig
from orchestrator.tasks import run_jobs
from rtmodel.exceptions import DataValidationError


class Command(PipelineCommand):
    help = "Apply the learner/attempt filters and write one qualified matrix per subset"

    def add_command_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--subsets", nargs="+", help="Subset names such as 1_any 2_incorrect")

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        return {"subsets": options.get("subsets")}

    def run(self, cfg: RunConfig, options: dict[str, Any]) -> dict[str, object]:
        courses = self.course_dirs(cfg)
        if not courses:
            raise DataValidationError(f"no extracted courses under {cfg.out}; run extract first")
        qualification = cfg.scored_qualification.model_dump(mode="json")
        subsets = list(self.subsets(cfg))
        calls = [(str(course), qualification, subsets) for course in courses]
        return {"courses": run_jobs("qualify_course", calls, cfg.jobs)}
