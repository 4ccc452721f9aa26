"""Generate a synthetic course with known parameters."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from apps.pipeline.command import PipelineCommand
from apps.pipeline.config import RunConfig
from orchestrator.tasks import run_jobs


class Command(PipelineCommand):
    help = "Write truth parameters, an event log and a course structure for a synthetic course"

    def add_command_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--users", type=int, help="Number of users")
        parser.add_argument("--questions", type=int, help="Number of questions")
        parser.add_argument("--missingness", type=float, help="Fraction of unobserved cells")
        parser.add_argument("--course", help="Course id")
        parser.add_argument("--questions-per-page", type=int, help="Questions served per page")

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        synth = {
            key: options.get(flag)
            for key, flag in (
                ("n_users", "users"),
                ("n_questions", "questions"),
                ("missingness", "missingness"),
                ("course_id", "course"),
            )
            if options.get(flag) is not None
        }
        return {"synth": synth, "questions_per_page": options.get("questions_per_page")}

    def run(self, cfg: RunConfig, options: dict[str, Any]) -> dict[str, object]:
        spec = cfg.synth_spec.model_dump(mode="json")
        (result,) = run_jobs("simulate_course", [(spec, str(cfg.out), cfg.questions_per_page)])
        return result
