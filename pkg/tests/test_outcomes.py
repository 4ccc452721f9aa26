from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from conftest import params
from scipy.special import expit

from lognormal.params import write_params_csv
from outcomes import (
    attach_slowness,
    learner_frame,
    logistic_fixed_effects,
    normalize_for_slowness,
    odds_factor,
    ols_fixed_effects,
    read_fitted_slowness,
    read_learner_records,
    run_outcome_analysis,
    slowness_models,
    standardize_per_course,
    write_regression_tables,
)
from outcomes.records import LEARNER_COLUMNS
from rtmodel.exceptions import DataValidationError, RegressionError


def _learners(seed: int, courses: int = 3, per_course: int = 200) -> pd.DataFrame:
    """Learner records with independent covariates; outcomes are filled in by the tests."""
    rng = np.random.default_rng(seed)
    n = courses * per_course
    return pd.DataFrame(
        {
            "course_id": np.repeat([f"c{k}" for k in range(courses)], per_course),
            "user_id": [f"u{i:04d}" for i in range(n)],
            "zeta1": rng.normal(0.0, 1.0, n),
            "zeta2": rng.normal(0.0, 1.0, n),
            "correctness": rng.uniform(0.2, 1.0, n),
            "education": rng.integers(0, 8, n),
            "age": rng.normal(30.0, 8.0, n),
            "videos": rng.poisson(20, n) + 1.0,
            "play_clicks": rng.poisson(40, n) + 1.0,
            "posts": rng.poisson(3, n) + 1.0,
            "grade": rng.uniform(0.0, 1.0, n),
            "completed": rng.random(n) < 0.5,
            "certified": rng.random(n) < 0.3,
        }
    )


def test_unit_mean_example() -> None:
    frame = pd.DataFrame({"course_id": ["c1", "c1"], "videos": [1.0, 2.0]})
    scaled = standardize_per_course(frame, ["videos"], "unit_mean")
    assert scaled.frame["videos"].tolist() == pytest.approx([2 / 3, 4 / 3])
    assert scaled.excluded == {}


def test_unit_variance_per_course() -> None:
    frame = _learners(1)
    scaled = standardize_per_course(frame, ["age"], "unit_variance").frame
    for _, group in scaled.groupby("course_id"):
        assert float(np.var(group["age"])) == pytest.approx(1.0)


def test_constant_variable_excludes_course() -> None:
    frame = pd.DataFrame({"course_id": ["c1", "c1", "c2", "c2"], "posts": [1.0, 3.0, 2.0, 2.0]})
    scaled = standardize_per_course(frame, ["posts"], "unit_variance")
    assert scaled.excluded == {"posts": ("c2",)}
    assert scaled.frame["posts"].iloc[2:].isna().all()
    assert scaled.frame["posts"].iloc[:2].notna().all()


def test_ols_recovers_noise_free_slope_and_intercepts() -> None:
    x = np.linspace(-1.0, 2.0, 12)
    frame = pd.DataFrame(
        {
            "course_id": ["a"] * 6 + ["b"] * 6,
            "user_id": [f"u{i:02d}" for i in range(12)],
            "x": x,
            "y": 2.0 * x + np.where(np.arange(12) < 6, 1.0, -3.0),
        }
    )
    result = ols_fixed_effects(frame, "y", ["x"])
    assert result.coefficient("x") == pytest.approx(2.0, abs=1e-8)
    assert result.course_effects == pytest.approx({"a": 1.0, "b": -3.0}, abs=1e-8)
    assert result.label == "y (course fixed effects)"


def test_ols_residuals_are_orthogonal_to_design() -> None:
    frame = _learners(2)
    result = ols_fixed_effects(frame, "grade", ["age", "education"])
    fitted = (
        result.coefficient("age") * frame["age"]
        + result.coefficient("education") * frame["education"]
        + frame["course_id"].map(result.course_effects)
    )
    resid = frame["grade"] - fitted
    assert float(resid @ frame["age"]) == pytest.approx(0.0, abs=1e-6)
    for course in result.course_effects:
        assert float(resid[frame["course_id"] == course].sum()) == pytest.approx(0.0, abs=1e-8)


def test_duplicate_predictor_is_rank_deficient() -> None:
    frame = _learners(3).assign(age_copy=lambda f: f["age"])
    with pytest.raises(RegressionError) as excinfo:
        ols_fixed_effects(frame, "grade", ["age", "age_copy"])
    assert excinfo.value.reason == "rank_deficient"
    assert "age_copy" in excinfo.value.detail


def test_too_few_records() -> None:
    frame = _learners(4).head(3)
    with pytest.raises(RegressionError, match="too_few_records"):
        ols_fixed_effects(frame, "grade", ["age", "education", "posts"])


def test_single_course_matches_plain_regression() -> None:
    frame = _learners(5, courses=1)
    result = ols_fixed_effects(frame, "grade", ["age", "posts"])
    x = np.column_stack([frame["age"], frame["posts"], np.ones(len(frame))])
    expected, *_ = np.linalg.lstsq(x, frame["grade"].to_numpy(), rcond=None)
    assert result.coef.tolist() == pytest.approx(expected[:2].tolist(), rel=1e-9)
    assert result.course_effects["c0"] == pytest.approx(expected[2], rel=1e-9)


def _two_by_two() -> pd.DataFrame:
    # x = 0: 40 of 50 succeed; x = 1: 10 of 50 succeed
    x = [0.0] * 50 + [1.0] * 50
    y = [True] * 40 + [False] * 10 + [True] * 10 + [False] * 40
    return pd.DataFrame(
        {"course_id": "c1", "user_id": [f"u{i:03d}" for i in range(100)], "x": x, "y": y}
    )


def test_logistic_reference_table() -> None:
    result = logistic_fixed_effects(_two_by_two(), "y", ["x"])
    assert result.converged
    assert result.coefficient("x") == pytest.approx(math.log(1 / 16), abs=1e-6)
    assert result.course_effects["c1"] == pytest.approx(math.log(4.0), abs=1e-6)
    assert np.all(np.diff(result.log_likelihood_trace) >= 0)
    assert odds_factor(result.coefficient("x")) == pytest.approx(1 / 16, rel=1e-5)


def test_logistic_flags_iteration_limit() -> None:
    result = logistic_fixed_effects(_two_by_two(), "y", ["x"], max_iter=1)
    assert not result.converged
    assert result.iterations == 1
    assert result.table()["converged"].eq(False).all()


def test_logistic_constant_outcome() -> None:
    frame = _learners(6).assign(completed=True)
    with pytest.raises(RegressionError) as excinfo:
        logistic_fixed_effects(frame, "completed", ["zeta1"])
    assert excinfo.value.reason == "constant_outcome"


def test_logistic_drops_courses_without_variation() -> None:
    frame = _learners(7)
    frame.loc[frame["course_id"] == "c2", "certified"] = False
    result = logistic_fixed_effects(frame, "certified", ["zeta1"])
    assert result.excluded_courses == ("c2",)
    assert set(result.course_effects) == {"c0", "c1"}


def test_logistic_detects_planted_slowness_effect() -> None:
    frame = _learners(8, per_course=400)
    rng = np.random.default_rng(80)
    shift = frame["course_id"].map({"c0": -0.5, "c1": 0.0, "c2": 0.5})
    frame["completed"] = rng.random(len(frame)) < expit(0.8 * frame["zeta1"] + shift)
    result = logistic_fixed_effects(frame, "completed", ["zeta1", "education"])
    k = result.predictors.index("zeta1")
    assert result.coef[k] > 0 and result.p[k] < 0.01
    assert abs(result.coef[k] - 0.8) < 3 * result.se[k]


def test_odds_factor() -> None:
    assert odds_factor(0.0) == 1.0
    assert odds_factor(0.1017) == pytest.approx(1.107, abs=1e-3)
    assert odds_factor(0.3) * odds_factor(-0.3) == pytest.approx(1.0)


def test_slowness_regression_recovers_planted_age_effect() -> None:
    frame = _learners(9, per_course=1000)
    rng = np.random.default_rng(90)
    frame["zeta1"] = 0.112 * (frame["age"] - 30.0) / 8.0 + rng.normal(0.0, 1.0, len(frame))
    frame["age"] = (frame["age"] - 30.0) / 8.0
    result = ols_fixed_effects(frame, "zeta1", ["education", "age", "videos"])
    k = result.predictors.index("age")
    assert abs(result.coef[k] - 0.112) < 3 * result.se[k]


def test_slowness_models_on_normalized_records() -> None:
    frame = _learners(10, per_course=600)
    rng = np.random.default_rng(100)
    frame["zeta1"] = 0.5 * frame["posts"] / 4.0 + rng.normal(0.0, 1.0, len(frame))
    normalized = normalize_for_slowness(frame)
    first, second = slowness_models(normalized.frame)
    assert first.label == "Slowness 1 (course fixed effects)"
    k = first.predictors.index("posts")
    assert first.coef[k] > 0 and first.p[k] < 0.01
    assert second.outcome == "zeta2"
    assert all(sd == pytest.approx(1.0, rel=0.05) for sd in first.sd_course.values())


def test_outcome_analysis_reports_failed_models() -> None:
    frame = _learners(11).assign(zeta2=math.nan)
    results, failures = run_outcome_analysis(frame)
    assert sorted(failures) == ["Certification 2", "Completion 2", "Grade 2", "Slowness 2"]
    labels = [r.label for r in results]
    assert labels == [
        "Completion 1 (course fixed effects)",
        "Certification 1 (course fixed effects)",
        "Grade 1 (course fixed effects)",
        "Slowness 1 (course fixed effects)",
    ]


def test_regression_tables_written(tmp_path: Path) -> None:
    results, _ = run_outcome_analysis(_learners(12))
    write_regression_tables(results, tmp_path)
    table = pd.read_csv(tmp_path / "regressions.csv")
    assert list(table.columns) == [
        "model", "predictor", "sd_pooled", "sd_course", "coef", "se", "z", "p", "n", "converged"
    ]
    assert table["model"].nunique() == 8
    effects = pd.read_csv(tmp_path / "course_effects.csv")
    assert set(effects["course_id"]) == {"c0", "c1", "c2"}


def test_learner_records_read(tmp_path: Path) -> None:
    frame = _learners(13, courses=1, per_course=5).drop(columns=["zeta1", "zeta2"])
    path = tmp_path / "learners.csv"
    frame.to_csv(path, index=False)
    records = read_learner_records(path)
    assert len(records) == 5 and records[0].zeta1 is None
    loaded = learner_frame(records)
    assert list(loaded.columns) == list(LEARNER_COLUMNS)
    assert loaded["zeta1"].isna().all()


def test_learner_records_missing_column(tmp_path: Path) -> None:
    path = tmp_path / "learners.csv"
    _learners(14, courses=1, per_course=3).drop(columns=["grade"]).to_csv(path, index=False)
    with pytest.raises(DataValidationError, match="grade"):
        read_learner_records(path)


def test_learner_records_invalid_row(tmp_path: Path) -> None:
    frame = _learners(15, courses=1, per_course=3)
    frame.loc[1, "education"] = 9
    path = tmp_path / "learners.csv"
    frame.to_csv(path, index=False)
    with pytest.raises(DataValidationError, match=":3:"):
        read_learner_records(path)


def test_attach_and_read_fitted_slowness(tmp_path: Path) -> None:
    frame = _learners(16, courses=1, per_course=3).assign(zeta1=math.nan, zeta2=math.nan)
    fitted = params(("q1",), ("u0000", "u0001"), [1.0], [4.0], [-0.5, 0.5])
    write_params_csv(fitted, tmp_path / "c0" / "1_any" / "params.csv")
    fits = read_fitted_slowness(tmp_path)
    assert set(fits) == {"c0"} and fits["c0"][1] is None
    attached = attach_slowness(frame, fits)
    assert attached["zeta1"].tolist()[:2] == [-0.5, 0.5]
    assert math.isnan(attached["zeta1"].iloc[2])
    assert attached["zeta2"].isna().all()
