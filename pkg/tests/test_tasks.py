from __future__ import annotations

from pathlib import Path

import pytest
from conftest import dense_matrix

from cohort.matrix import write_matrix
from orchestrator import stages
from orchestrator.tasks import run_jobs
from rtmodel.exceptions import DataValidationError
from synthetic import SynthSpec


def _calls(out: Path, count: int = 3) -> list[tuple[dict[str, object], str]]:
    return [
        (SynthSpec(n_users=12, n_questions=4, seed=k, course_id=f"c{k}").model_dump(), str(out))
        for k in range(count)
    ]


def test_process_pool_matches_sequential(tmp_path: Path) -> None:
    sequential = run_jobs("simulate_course", _calls(tmp_path / "seq"), jobs=1)
    pooled = run_jobs("simulate_course", _calls(tmp_path / "pool"), jobs=2)
    assert pooled == sequential
    assert [r["course"] for r in pooled] == ["c0", "c1", "c2"]
    for k in range(3):
        name = f"c{k}/events.jsonl"
        assert (tmp_path / "seq" / name).read_bytes() == (tmp_path / "pool" / name).read_bytes()


def test_no_calls_returns_empty() -> None:
    assert run_jobs("fit_subset", [], jobs=4) == []


def test_unknown_stage() -> None:
    with pytest.raises(KeyError):
        run_jobs("no_such_stage", [()])


def test_stage_errors_propagate(tmp_path: Path) -> None:
    with pytest.raises(DataValidationError, match="missing prerequisite"):
        run_jobs("fit_subset", [(str(tmp_path / "1_any"), {})])


def test_subset_names() -> None:
    assert stages.subset_names() == (
        "1_any",
        "1_correct",
        "1_incorrect",
        "2_any",
        "2_correct",
        "2_incorrect",
    )
    assert stages.subset_names(["2_any", "1_any"]) == ("1_any", "2_any")
    assert stages.fit_status(Path("/nonexistent")) is None


def test_fitted_params_keep_capped_alpha_flags(tmp_path: Path) -> None:
    subset = tmp_path / "c1" / "1_any"
    write_matrix(dense_matrix([[1.0, 2.0], [3.0, 4.0]]), subset)
    summary = stages.fit_subset(str(subset), {})
    assert summary["degenerate_questions"] == ["q0", "q1"]
    assert stages.read_fitted_params(subset).degenerate == frozenset({"q0", "q1"})
