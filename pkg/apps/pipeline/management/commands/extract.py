"""Extract response-time observations from course event logs."""

from __future__ import annotations

from argparse import ArgumentParser
from pathlib import Path
from typing import Any

from apps.pipeline.command import PipelineCommand
from apps.pipeline.config import RunConfig
from orchestrator.tasks import run_jobs
from rtmodel.exceptions import ConfigurationError


class Command(PipelineCommand):
    help = "Parse event logs and write observations, attempt counts and tallies per course"

    def add_command_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--events", type=Path, nargs="+", help="Event JSON Lines files")
        parser.add_argument("--structure", type=Path, nargs="+", help="Course structure files")
        parser.add_argument("--rule", choices=["chain", "page_load"], help="First-response rule")

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        values: dict[str, Any] = {
            "events": options.get("events"),
            "structures": options.get("structure"),
        }
        if options.get("rule"):
            values["extraction"] = {"first_response_rule": options["rule"]}
        return values

    def run(self, cfg: RunConfig, options: dict[str, Any]) -> dict[str, object]:
        if not cfg.events:
            raise ConfigurationError("no event files given (--events or config 'events')")
        structures = {course: str(path) for course, path in cfg.structure_paths().items()}
        extraction = cfg.extraction.model_dump(mode="json")
        qualification = cfg.qualification.model_dump(mode="json")
        calls = [
            (str(path), str(cfg.out), extraction, qualification, structures)
            for path in cfg.events
        ]
        results = run_jobs("extract_course", calls, cfg.jobs)
        return {"courses": sorted(results, key=lambda r: str(r["course"]))}
