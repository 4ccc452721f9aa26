"""Correlate two fitted parameter sets."""

from __future__ import annotations

from argparse import ArgumentParser
from pathlib import Path
from typing import Any

from apps.pipeline.command import PipelineCommand
from apps.pipeline.config import RunConfig
from diagnostics.correlation import compare_fits
from diagnostics.report import write_comparison
from lognormal.params import read_params_csv
from rtmodel.exceptions import DataValidationError


class Command(PipelineCommand):
    help = "Pearson r ± se and RMSE of zeta, beta and alpha between two parameter CSVs"

    def add_command_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--a", type=Path, required=True, help="First parameter CSV")
        parser.add_argument("--b", type=Path, required=True, help="Second parameter CSV")
        parser.add_argument("--name", default="compare", help="Output subdirectory")

    def run(self, cfg: RunConfig, options: dict[str, Any]) -> dict[str, object]:
        paths = [Path(options["a"]), Path(options["b"])]
        for path in paths:
            if not path.is_file():
                raise DataValidationError(f"missing prerequisite {path}")
        first, second = (read_params_csv(path) for path in paths)
        comparisons = compare_fits(first, second)
        write_comparison(comparisons, cfg.out / options["name"])
        return {kind: comparison.to_dict() for kind, comparison in comparisons.items()}
