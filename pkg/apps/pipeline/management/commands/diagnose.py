"""Write goodness-of-fit diagnostics and within-course fit comparisons."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from apps.pipeline.command import PipelineCommand
from apps.pipeline.config import RunConfig
from orchestrator.stages import fit_status
from orchestrator.tasks import run_jobs
from rtmodel.exceptions import DataValidationError


class Command(PipelineCommand):
    help = "Residual moments, ECDF, dataset statistics and parameter summaries per fitted subset"

    def add_command_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--subsets", nargs="+", help="Subset names such as 1_any 2_incorrect")
        parser.add_argument(
            "--about-mean",
            action="store_true",
            default=None,
            help="Per-question moments about each question's sample mean",
        )

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        return {"subsets": options.get("subsets"), "about_mean": options.get("about_mean")}

    def run(self, cfg: RunConfig, options: dict[str, Any]) -> dict[str, object]:
        courses = self.course_dirs(cfg, marker="qualify.json")
        if cfg.subsets:
            # explicitly requested subsets must all be diagnosable
            targets = [course / name for course in courses for name in self.subsets(cfg)]
        else:
            targets = [
                course / name
                for course in courses
                for name in self.subsets(cfg)
                if fit_status(course / name) == "fitted"
            ]
        if not targets:
            raise DataValidationError(f"no fitted subsets under {cfg.out}; run fit first")
        results = run_jobs(
            "diagnose_subset", [(str(t), cfg.about_mean) for t in targets], cfg.jobs
        )
        comparisons = run_jobs("compare_course_fits", [(str(c),) for c in courses], cfg.jobs)
        return {
            "diagnosed": [
                {"course": t.parent.name, "subset": t.name, "dataset": r["dataset"]}
                for t, r in zip(targets, results)
            ],
            "comparisons": comparisons,
        }
