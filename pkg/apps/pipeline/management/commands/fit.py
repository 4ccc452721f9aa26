"""Fit the log-normal model to every qualified subset matrix."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from apps.pipeline.command import PipelineCommand
from apps.pipeline.config import RunConfig
from orchestrator.tasks import run_jobs
from rtmodel.exceptions import DataValidationError


class Command(PipelineCommand):
    help = "Fit each subset matrix, qualifying courses first where matrices are missing"

    def add_command_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--subsets", nargs="+", help="Subset names such as 1_any 2_incorrect")
        parser.add_argument(
            "--optimizer", choices=["block_coordinate", "conjugate_gradient"], help="Minimizer"
        )

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        values: dict[str, Any] = {"subsets": options.get("subsets")}
        if options.get("optimizer"):
            values["fit"] = {"optimizer": options["optimizer"]}
        return values

    def run(self, cfg: RunConfig, options: dict[str, Any]) -> dict[str, object]:
        courses = self.course_dirs(cfg)
        if not courses:
            raise DataValidationError(f"no extracted courses under {cfg.out}; run extract first")
        subsets = list(self.subsets(cfg))
        pending = [
            course
            for course in courses
            if any(not (course / name / "matrix.json").is_file() for name in subsets)
        ]
        if pending:
            qualification = cfg.scored_qualification.model_dump(mode="json")
            run_jobs(
                "qualify_course",
                [(str(course), qualification, subsets) for course in pending],
                cfg.jobs,
            )
        fit_config = cfg.fit.model_dump(mode="json")
        calls = [(str(course / name), fit_config) for course in courses for name in subsets]
        results = run_jobs("fit_subset", calls, cfg.jobs)
        fits = [
            {"course": course.name, **result}
            for (course, _name), result in zip(
                ((c, n) for c in courses for n in subsets), results
            )
        ]
        return {"qualified": [c.name for c in pending], "fits": fits}
