"""Per-course and per-subset pipeline stages.

Each stage reads its inputs from and writes its artifacts to the run's output
tree, takes only JSON-serializable arguments and returns a JSON-serializable
summary, so it can run in-process, in a worker process or as a Celery task.

Layout under ``out``::

    <course>/events.jsonl, structure.json, truth_*      simulate
    <course>/observations.csv, attempts.csv, users.csv,
    <course>/extract.json                               extract
    <course>/qualify.json, <course>/<subset>/matrix.*   qualify
    <course>/<subset>/params.csv, fit.json              fit
    <course>/<subset>/diagnostics.json, *.csv           diagnose
    <course>/comparisons/<a>__<b>/                      diagnose
"""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Mapping, Sequence
from pathlib import Path

import structlog

from cohort.config import QualificationConfig
from cohort.filters import prepare_observations
from cohort.matrix import SUBSET_LABELS, SubsetLabel, build_subsets, read_matrix, write_matrix
from cohort.structure import (
    CourseStructure,
    chapter_visits,
    read_explored_users,
    required_chapters,
    write_chapter_visits,
)
from diagnostics.correlation import compare_fits
from diagnostics.report import diagnose_fit, write_comparison, write_diagnostics, write_json
from ingest.config import ExtractionConfig
from ingest.events import read_event_log, serialize_events
from ingest.extraction import (
    extract_log,
    read_attempt_counts,
    read_observations_csv,
    write_attempt_counts,
    write_observations_csv,
)
from lognormal.config import FitConfig
from lognormal.fit import fit
from lognormal.params import ModelParams, read_params_csv, write_params_csv
from rtmodel.exceptions import ConfigurationError, DataValidationError
from synthetic.events import course_structure, emit_event_log
from synthetic.generator import generate, write_truth
from synthetic.spec import SynthSpec

logger = structlog.get_logger(__name__)

# Within-course fit pairs compared by ``diagnose``
COMPARISON_PAIRS: tuple[tuple[str, str], ...] = (
    ("1_correct", "1_incorrect"),
    ("2_correct", "2_incorrect"),
    ("1_any", "2_any"),
)


def _require(path: Path) -> Path:
    if not path.exists():
        raise DataValidationError(f"missing prerequisite {path}")
    return path


def _read_json(path: Path) -> dict[str, object]:
    return json.loads(_require(path).read_text(encoding="utf-8"))


def _check_credit_threshold(extract_summary: Path, threshold: float) -> None:
    """Refuse a credit threshold other than the one the observations were extracted with."""
    if not extract_summary.exists():
        return
    recorded = _read_json(extract_summary).get("full_credit_threshold")
    if recorded is not None and recorded != threshold:
        raise ConfigurationError(
            f"full_credit_threshold {threshold} differs from {recorded} used by extract; "
            "re-run extract with the new threshold"
        )


def extract_course(
    events_path: str,
    out: str,
    extraction: Mapping[str, object],
    qualification: Mapping[str, object],
    structures: Mapping[str, str] | None = None,
) -> dict[str, object]:
    """Parse one course's events and write its observations and attempt counts.

    ``structures`` maps course ids to structure files; when the parsed course
    has one, per-user chapter visits go to ``users.csv``.
    """
    qual = QualificationConfig.model_validate(qualification)
    ext = ExtractionConfig.model_validate(extraction)
    threshold = ext.full_credit_threshold or qual.full_credit_threshold
    log = read_event_log(events_path)
    if not log.course_id:
        raise DataValidationError(f"no valid events in {events_path}")
    course_dir = Path(out) / log.course_id
    observations, attempts, tallies = extract_log(
        log, rule=ext.first_response_rule, full_credit_threshold=threshold
    )
    write_observations_csv(observations, course_dir / "observations.csv")
    write_attempt_counts(attempts, course_dir / "attempts.csv")
    summary: dict[str, object] = {
        "course": log.course_id,
        "events": log.accepted,
        "rejections": dict(log.rejections),
        "tallies": tallies,
        "observations": len(observations),
        "rule": ext.first_response_rule,
        "full_credit_threshold": threshold,
    }
    structure_path = (structures or {}).get(log.course_id)
    if structure_path is not None:
        structure = CourseStructure.load(structure_path)
        visit_tallies: Counter[str] = Counter()
        visits = chapter_visits(log, structure, visit_tallies)
        need = required_chapters(structure, qual)
        write_chapter_visits(visits, need, course_dir / "users.csv")
        summary["required_chapters"] = need
        summary["explored_users"] = sum(1 for n in visits.values() if n >= need)
        summary["tallies"] = dict(sorted({**tallies, **visit_tallies}.items()))
    write_json(summary, course_dir / "extract.json")
    return summary


def qualify_course(
    course_dir: str, qualification: Mapping[str, object], subsets: Sequence[str]
) -> dict[str, object]:
    """Filter a course's observations and write one qualified matrix per subset."""
    qual = QualificationConfig.model_validate(qualification)
    root = Path(course_dir)
    _check_credit_threshold(root / "extract.json", qual.full_credit_threshold)
    observations = read_observations_csv(_require(root / "observations.csv"))
    attempt_counts = read_attempt_counts(_require(root / "attempts.csv"))
    users_file = root / "users.csv"
    explored = read_explored_users(users_file) if users_file.exists() else None
    tallies: Counter[str] = Counter()
    kept = prepare_observations(observations, attempt_counts, qual, explored, tallies)
    matrices = build_subsets(kept, qual, tallies)
    wanted = set(subsets)
    shapes: dict[str, object] = {}
    for label, matrix in matrices.items():
        if label.name not in wanted:
            continue
        write_matrix(matrix, root / label.name)
        shapes[label.name] = {
            "n_users": matrix.n_users,
            "n_questions": matrix.n_questions,
            "unfittable": matrix.unfittable,
        }
    summary = {
        "course": root.name,
        "observations": len(observations),
        "kept": len(kept),
        "explored_filter": explored is not None,
        "tallies": dict(sorted(tallies.items())),
        "subsets": shapes,
    }
    write_json(summary, root / "qualify.json")
    return summary


def fit_subset(subset_dir: str, fit_config: Mapping[str, object]) -> dict[str, object]:
    """Fit one subset matrix; an unfittable matrix is recorded, not raised."""
    cfg = FitConfig.model_validate(fit_config)
    root = Path(subset_dir)
    _require(root / "matrix.json")
    matrix = read_matrix(root)
    if matrix.unfittable or matrix.is_empty:
        (root / "params.csv").unlink(missing_ok=True)
        payload: dict[str, object] = {"subset": root.name, "status": "unfittable"}
        write_json(payload, root / "fit.json")
        logger.info("fit.unfittable", course=root.parent.name, subset=root.name)
        return payload
    params, report = fit(matrix, cfg)
    write_params_csv(params, root / "params.csv")
    payload = {"subset": root.name, "status": "fitted", **report.to_dict()}
    write_json(payload, root / "fit.json")
    return payload


def read_fitted_params(subset_dir: Path) -> ModelParams:
    """Parameters of a fitted subset with the capped-alpha flags from ``fit.json``."""
    report_path = subset_dir / "fit.json"
    flagged = _read_json(report_path).get("degenerate_questions") if report_path.exists() else None
    degenerate = [str(q) for q in flagged] if isinstance(flagged, list) else []
    return read_params_csv(_require(subset_dir / "params.csv"), degenerate=degenerate)


def diagnose_subset(subset_dir: str, about_mean: bool = False) -> dict[str, object]:
    """Write the diagnostic products of a fitted subset."""
    root = Path(subset_dir)
    _require(root / "matrix.json")
    matrix = read_matrix(root)
    if matrix.is_empty:
        raise DataValidationError(f"matrix in {root} is empty")
    params = read_fitted_params(root)
    diagnostics = diagnose_fit(params, matrix, about_mean=about_mean)
    write_diagnostics(diagnostics, root)
    return {
        "subset": root.name,
        "degenerate_questions": sorted(params.degenerate),
        **diagnostics.to_dict(),
    }


def compare_course_fits(course_dir: str) -> dict[str, object]:
    """Correlate parameters between the standard within-course subset pairs."""
    root = Path(course_dir)
    compared: dict[str, object] = {}
    for first, second in COMPARISON_PAIRS:
        a, b = root / first, root / second
        if not ((a / "params.csv").is_file() and (b / "params.csv").is_file()):
            continue
        comparisons = compare_fits(read_fitted_params(a), read_fitted_params(b))
        write_comparison(comparisons, root / "comparisons" / f"{first}__{second}")
        compared[f"{first}__{second}"] = {k: c.to_dict() for k, c in comparisons.items()}
    return {"course": root.name, "comparisons": compared}


def simulate_course(
    spec: Mapping[str, object], out: str, questions_per_page: int = 1
) -> dict[str, object]:
    """Generate a synthetic course and write its truth, events and structure."""
    synth = SynthSpec.model_validate(spec)
    truth = generate(synth)
    course_dir = Path(out) / truth.course_id
    write_truth(truth, course_dir)
    log = emit_event_log(truth, questions_per_page=questions_per_page)
    course_dir.mkdir(parents=True, exist_ok=True)
    (course_dir / "events.jsonl").write_text(serialize_events(log), encoding="utf-8")
    course_structure(truth, questions_per_page).dump(course_dir / "structure.json")
    return {
        "course": truth.course_id,
        "seed": synth.seed,
        "events": log.accepted,
        "observations": truth.matrix.n_observations,
    }


def subset_names(selection: Sequence[str] | None = None) -> tuple[str, ...]:
    """Validated subset names in canonical order (all six by default)."""
    if not selection:
        return tuple(label.name for label in SUBSET_LABELS)
    wanted = {SubsetLabel.parse(name) for name in selection}
    return tuple(label.name for label in SUBSET_LABELS if label in wanted)


def fit_status(subset_dir: Path) -> str | None:
    """``fitted``/``unfittable`` from a subset's fit.json, or None before fitting."""
    path = subset_dir / "fit.json"
    if not path.is_file():
        return None
    return str(_read_json(path).get("status"))
