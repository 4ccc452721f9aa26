from __future__ import annotations

import json
from collections.abc import Callable
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from conftest import load, submit
from django.core.management import call_command
from django.core.management.base import CommandError

from apps.pipeline.config import RunConfig
from ingest.events import serialize_events, sort_and_validate
from lognormal.params import ModelParams, write_params_csv
from rtmodel.exceptions import ConfigurationError, InputError

ConfigWriter = Callable[[dict[str, object]], Path]


def run(name: str, **options: object) -> dict[str, object]:
    out = StringIO()
    call_command(name, stdout=out, **options)
    return json.loads(out.getvalue())


def exit_code(name: str, **options: object) -> int:
    with pytest.raises(CommandError) as excinfo:
        call_command(name, stdout=StringIO(), **options)
    return int(excinfo.value.returncode)


def simulated_pipeline(out: Path, seed: int = 5) -> None:
    course = out / "synthetic"
    run("simulate", out=out, users=40, questions=15, missingness=0.1, seed=seed)
    run("extract", out=out, events=[course / "events.jsonl"], structure=[course / "structure.json"])
    run("qualify", out=out)
    run("fit", out=out)
    run("diagnose", out=out)


def tree_bytes(root: Path) -> dict[str, bytes]:
    files = (p for p in sorted(root.rglob("*")) if p.is_file())
    return {str(p.relative_to(root)): p.read_bytes() for p in files}


def test_extract_worked_session(tmp_path: Path) -> None:
    log = sort_and_validate(
        [
            load("u1", "p1", 0.0),
            submit("u1", "p1", "A", 50.0, score=0.0),
            submit("u1", "p1", "B", 120.0),
            submit("u1", "p1", "A", 140.0),
        ]
    )
    events = tmp_path / "events.jsonl"
    events.write_text(serialize_events(log), encoding="utf-8")
    summary = run("extract", out=tmp_path / "out", events=[events])
    (course,) = summary["courses"]  # type: ignore[misc]
    assert course["course"] == "c1" and course["observations"] == 3
    rows = pd.read_csv(tmp_path / "out" / "c1" / "observations.csv")
    assert list(zip(rows["question_id"], rows["attempt"], rows["response_time_s"])) == [
        ("A", 1, 50.0),
        ("B", 1, 70.0),
        ("A", 2, 90.0),
    ]


def test_qualify_refuses_credit_threshold_changed_after_extract(
    tmp_path: Path, write_config: ConfigWriter
) -> None:
    log = sort_and_validate([load("u1", "p1", 0.0), submit("u1", "p1", "A", 50.0, score=0.5)])
    events = tmp_path / "events.jsonl"
    events.write_text(serialize_events(log), encoding="utf-8")
    out = tmp_path / "out"
    run("extract", out=out, events=[events])
    lenient = write_config({"qualification": {"full_credit_threshold": 0.5}})
    assert exit_code("qualify", config=lenient, out=out) == 3

    run("extract", config=lenient, out=out, events=[events])
    assert json.loads((out / "c1" / "extract.json").read_text())["full_credit_threshold"] == 0.5
    run("qualify", config=lenient, out=out)


def test_missing_events_file_exits_1(tmp_path: Path) -> None:
    assert exit_code("extract", out=tmp_path, events=[tmp_path / "absent.jsonl"]) == 1


def test_invalid_config_exits_3(tmp_path: Path, write_config: ConfigWriter) -> None:
    path = write_config({"qualification": {"explored_fraction": 0}})
    assert exit_code("qualify", config=path, out=tmp_path) == 3


def test_unreadable_config_exits_1(tmp_path: Path) -> None:
    assert exit_code("qualify", config=tmp_path / "nope.json", out=tmp_path) == 1


def test_extract_without_events_exits_3(tmp_path: Path) -> None:
    assert exit_code("extract", out=tmp_path) == 3


def test_compare_missing_file_exits_2(tmp_path: Path) -> None:
    assert exit_code("compare", out=tmp_path, a=tmp_path / "a.csv", b=tmp_path / "b.csv") == 2


def test_diagnose_without_fits_exits_2(tmp_path: Path) -> None:
    assert exit_code("diagnose", out=tmp_path) == 2


def test_compare_disjoint_fits(tmp_path: Path) -> None:
    def write(prefix: str) -> Path:
        ids = tuple(f"{prefix}{k}" for k in range(4))
        p = ModelParams(ids, ids, np.ones(4), np.arange(4.0), np.arange(4.0) - 1.5)
        path = tmp_path / f"{prefix}.csv"
        write_params_csv(p, path)
        return path

    summary = run("compare", out=tmp_path / "out", a=write("x"), b=write("y"))
    statuses = {v["status"] for v in summary.values()}  # type: ignore[index]
    assert statuses == {"insufficient_overlap"}
    assert (tmp_path / "out" / "compare" / "comparison.csv").is_file()


def test_pipeline_is_reproducible(tmp_path: Path) -> None:
    simulated_pipeline(tmp_path / "first")
    simulated_pipeline(tmp_path / "second")
    first, second = tree_bytes(tmp_path / "first"), tree_bytes(tmp_path / "second")
    assert first.keys() == second.keys()
    assert first == second
    course = tmp_path / "first" / "synthetic"
    assert json.loads((course / "1_any" / "fit.json").read_text())["status"] == "fitted"
    assert json.loads((course / "2_any" / "fit.json").read_text())["status"] == "unfittable"
    assert (course / "1_any" / "diagnostics.json").is_file()
    assert not (course / "2_any" / "diagnostics.json").exists()


def test_simulated_fit_recovers_truth(tmp_path: Path) -> None:
    out = tmp_path / "out"
    course = out / "synthetic"
    run("simulate", out=out, users=300, questions=40, seed=11)
    run("extract", out=out, events=[course / "events.jsonl"], structure=[course / "structure.json"])
    fits = run("fit", out=out, subsets=["1_any"])
    assert fits["qualified"] == ["synthetic"]
    summary = run(
        "compare", out=out, a=course / "truth_params.csv", b=course / "1_any" / "params.csv"
    )
    assert summary["zeta"]["r"] >= 0.9  # type: ignore[index]
    assert summary["beta"]["rmse"] <= 0.3  # type: ignore[index]
    assert summary["alpha"]["r"] >= 0.6  # type: ignore[index]


def test_fit_with_conjugate_gradient(tmp_path: Path) -> None:
    out = tmp_path / "out"
    course = out / "synthetic"
    run("simulate", out=out, users=30, questions=12, missingness=0.0, seed=2)
    run("extract", out=out, events=[course / "events.jsonl"])
    summary = run("fit", out=out, subsets=["1_any"], optimizer="conjugate_gradient")
    (result,) = summary["fits"]  # type: ignore[misc]
    assert result["status"] == "fitted" and result["optimizer"] == "conjugate_gradient"


def test_outcomes_command(tmp_path: Path) -> None:
    rng = np.random.default_rng(21)
    n = 300
    frame = pd.DataFrame(
        {
            "course_id": np.repeat(["c1", "c2"], n // 2),
            "user_id": [f"u{i:03d}" for i in range(n)],
            "zeta1": rng.normal(0.0, 1.0, n),
            "zeta2": rng.normal(0.0, 1.0, n),
            "correctness": rng.uniform(0.0, 1.0, n),
            "education": rng.integers(0, 8, n),
            "age": rng.uniform(18.0, 70.0, n),
            "videos": rng.poisson(10, n),
            "play_clicks": rng.poisson(30, n) + 1,
            "posts": rng.poisson(2, n) + 1,
            "grade": rng.uniform(0.0, 1.0, n),
            "completed": rng.random(n) < 0.6,
            "certified": rng.random(n) < 0.4,
        }
    )
    learners = tmp_path / "learners.csv"
    frame.to_csv(learners, index=False)
    summary = run("outcomes", out=tmp_path / "out", learners=str(learners))
    assert summary["learners"] == n and summary["failed"] == {}
    assert len(summary["models"]) == 8  # type: ignore[arg-type]
    assert (tmp_path / "out" / "outcomes" / "regressions.csv").is_file()


def test_outcomes_without_learners_exits_3(tmp_path: Path) -> None:
    assert exit_code("outcomes", out=tmp_path) == 3


def test_config_merges_sections_and_flags_win(write_config: ConfigWriter) -> None:
    path = write_config({"qualification": {"explored_fraction": 0.3}, "jobs": 4, "seed": 1})
    cfg = RunConfig.load(path, {"qualification": {"max_attempts": 3}, "seed": 9})
    assert cfg.qualification.explored_fraction == 0.3
    assert cfg.qualification.max_attempts == 3
    assert cfg.jobs == 4 and cfg.seed == 9
    assert cfg.synth_spec.seed == 9


def test_config_errors(tmp_path: Path, write_config: ConfigWriter) -> None:
    with pytest.raises(ConfigurationError):
        RunConfig.load(write_config({"subsets": ["3_any"]}))
    with pytest.raises(ConfigurationError):
        RunConfig.load(write_config({"unknown": 1}))
    with pytest.raises(InputError):
        RunConfig.load(tmp_path / "missing.json")
