"""Assemble the diagnostic products of a fit and write them as CSV/JSON."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import structlog

from cohort.matrix import ResponseMatrix
from lognormal.objective import standardized_residuals
from lognormal.params import ModelParams
from rtmodel.exceptions import DiagnosticsError

from .correlation import (
    Correlation,
    DatasetStats,
    ParameterComparison,
    dataset_stats,
    intensity_discrimination_relation,
)
from .moments import (
    DEVIATION_NAMES,
    DeviationSet,
    MomentSet,
    ecdf_vs_normal,
    moment_deviations,
    per_question_deviations,
    percentile_curves,
    raw_moments,
)
from .summaries import parameter_density, parameter_summary

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class FitDiagnostics:
    """Every diagnostic product of one fitted subset."""

    stats: DatasetStats
    moments: MomentSet
    deviations: DeviationSet
    ecdf: np.ndarray
    question_deviations: dict[str, DeviationSet]
    deviation_curves: dict[str, tuple[np.ndarray, np.ndarray]]
    summary: dict[str, float | int]
    about_mean: bool = False
    intensity_relation: Correlation | None = None
    intensity_pairs: np.ndarray | None = None
    densities: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, object]:
        relation = self.intensity_relation
        return {
            "dataset": self.stats.to_dict(),
            "moments": dict(zip(("m1", "m2", "m3", "m4"), self.moments.as_tuple())),
            "deviations": dict(zip(DEVIATION_NAMES, self.deviations.as_tuple())),
            "question_moments_about_mean": self.about_mean,
            "parameters": self.summary,
            "intensity_discrimination": (
                None if relation is None else {"r": relation.r, "se": relation.se, "n": relation.n}
            ),
        }


def diagnose_fit(
    params: ModelParams, matrix: ResponseMatrix, *, about_mean: bool = False
) -> FitDiagnostics:
    """Compute residual, dataset and parameter diagnostics of a fit.

    Statistics that are undefined for this fit (too few questions, constant
    parameters) are left out rather than raised.

    Raises:
        DiagnosticsError: The matrix has no observations.
    """
    stats = dataset_stats(matrix)
    x = standardized_residuals(params, matrix)
    moments = raw_moments(x)
    question_deviations = per_question_deviations(
        matrix.by_question(x), about_mean=about_mean
    )
    relation: Correlation | None = None
    pairs: np.ndarray | None = None
    try:
        relation, pairs = intensity_discrimination_relation(params)
    except DiagnosticsError as exc:
        logger.info("diagnostics.skipped", product="intensity_discrimination", reason=str(exc))
    densities: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for kind in ("alpha", "beta"):
        try:
            densities[kind] = parameter_density(getattr(params, kind))
        except DiagnosticsError as exc:
            logger.info("diagnostics.skipped", product=f"{kind}_density", reason=str(exc))
    return FitDiagnostics(
        stats=stats,
        moments=moments,
        deviations=moment_deviations(moments),
        ecdf=ecdf_vs_normal(x),
        question_deviations=question_deviations,
        deviation_curves=percentile_curves(question_deviations),
        summary=parameter_summary(params),
        about_mean=about_mean,
        intensity_relation=relation,
        intensity_pairs=pairs,
        densities=densities,
    )


def write_json(payload: Mapping[str, object], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_curve(x: np.ndarray, y: np.ndarray, path: Path) -> None:
    """Write plot data with an ``x,y`` header."""
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"x": np.asarray(x), "y": np.asarray(y)}).to_csv(path, index=False)


def write_diagnostics(diagnostics: FitDiagnostics, directory: Path) -> None:
    """Write ``diagnostics.json`` and the plot-data CSVs of one subset."""
    directory.mkdir(parents=True, exist_ok=True)
    write_json(diagnostics.to_dict(), directory / "diagnostics.json")
    write_curve(diagnostics.ecdf[:, 0], diagnostics.ecdf[:, 1], directory / "ecdf.csv")
    rows = [(q, *d.as_tuple()) for q, d in sorted(diagnostics.question_deviations.items())]
    pd.DataFrame(rows, columns=["question_id", *DEVIATION_NAMES]).to_csv(
        directory / "question_deviations.csv", index=False
    )
    for name, (x, y) in diagnostics.deviation_curves.items():
        write_curve(x, y, directory / f"deviation_curve_{name}.csv")
    for kind, (x, y) in sorted(diagnostics.densities.items()):
        write_curve(x, y, directory / f"{kind}_density.csv")
    if diagnostics.intensity_pairs is not None:
        pairs = diagnostics.intensity_pairs
        write_curve(pairs[:, 0], pairs[:, 1], directory / "intensity_discrimination.csv")


def write_comparison(comparisons: Mapping[str, ParameterComparison], directory: Path) -> None:
    """Write ``comparison.csv``, ``comparison.json`` and per-kind scatter data."""
    directory.mkdir(parents=True, exist_ok=True)
    table = [comparison.to_dict() for comparison in comparisons.values()]
    pd.DataFrame(table, columns=["kind", "status", "n_shared", "r", "se", "rmse"]).to_csv(
        directory / "comparison.csv", index=False
    )
    write_json({"comparisons": table}, directory / "comparison.json")
    for kind, comparison in comparisons.items():
        if comparison.scatter:
            pd.DataFrame(list(comparison.scatter), columns=["id", "x", "y"]).to_csv(
                directory / f"scatter_{kind}.csv", index=False
            )
