"""Outcome and slowness regressions over learner records."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from apps.pipeline.command import PipelineCommand
from apps.pipeline.config import RunConfig
from diagnostics.report import write_json
from outcomes import (
    attach_slowness,
    learner_frame,
    read_fitted_slowness,
    read_learner_records,
    run_outcome_analysis,
    write_regression_tables,
)
from rtmodel.exceptions import ConfigurationError, RegressionError


class Command(PipelineCommand):
    help = "Course-outcome and user-slowness regressions with course fixed effects"

    def add_command_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--learners", help="Learner CSV")
        parser.add_argument("--fits", help="Output tree whose 1_any/2_any fits supply slowness")

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        return {"learners": options.get("learners"), "fits": options.get("fits")}

    def run(self, cfg: RunConfig, options: dict[str, Any]) -> dict[str, object]:
        if cfg.learners is None:
            raise ConfigurationError("no learner file given (--learners or config 'learners')")
        frame = learner_frame(read_learner_records(cfg.learners))
        if cfg.fits is not None:
            frame = attach_slowness(frame, read_fitted_slowness(cfg.fits))
        results, failures = run_outcome_analysis(frame)
        if not results:
            raise RegressionError("no_model_estimated", "; ".join(failures.values()))
        directory = cfg.out / "outcomes"
        write_regression_tables(results, directory)
        summary: dict[str, object] = {
            "learners": len(frame),
            "models": {
                r.label: {
                    "n": r.n,
                    "converged": r.converged,
                    "excluded_courses": list(r.excluded_courses),
                    "coef": dict(zip(r.predictors, r.coef.tolist())),
                    "p": dict(zip(r.predictors, r.p.tolist())),
                }
                for r in results
            },
            "failed": failures,
        }
        write_json(summary, directory / "outcomes.json")
        return summary
