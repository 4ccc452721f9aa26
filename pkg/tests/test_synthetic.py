from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from conftest import dense_matrix, params

from ingest.extraction import extract_log
from lognormal import fit
from lognormal.params import read_params_csv
from rtmodel.exceptions import ConfigurationError, ConsistencyError
from synthetic import (
    SynthSpec,
    SynthTruth,
    course_structure,
    emit_event_log,
    generate,
    page_layout,
    recovery_report,
    sampled_times,
    write_truth,
)
from synthetic.events import LOG_ORIGIN


def _hand_truth(times: list[float]) -> SynthTruth:
    n = len(times)
    qids = tuple(f"q{j}" for j in range(n))
    return SynthTruth(
        spec=SynthSpec(n_users=1, n_questions=n, course_id="c1"),
        params=params(qids, ("u0",), [1.0] * n, [math.log(t) for t in times], [0.0]),
        matrix=dense_matrix([[math.log(t) for t in times]]),
        times=np.array(times),
    )


def test_generation_is_deterministic() -> None:
    spec = SynthSpec(n_users=40, n_questions=12, seed=9)
    a, b = generate(spec), generate(spec)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.params.zeta, b.params.zeta)
    assert np.array_equal(a.matrix.rows, b.matrix.rows)
    assert not np.array_equal(a.times, generate(spec.model_copy(update={"seed": 10})).times)


def test_noise_free_course_sits_at_intensity() -> None:
    spec = SynthSpec(
        n_users=20, n_questions=5, zeta_sd=0.0, beta_sd=0.0, alpha_log_mean=10.0, alpha_log_sd=0.0
    )
    truth = generate(spec)
    np.testing.assert_allclose(truth.matrix.log_times, 5.1, atol=1e-3)


def test_generated_noise_is_centred() -> None:
    truth = generate(SynthSpec(n_users=300, n_questions=40, seed=1))
    p, m = truth.params, truth.matrix
    z = (m.log_times - p.beta[m.cols] - p.zeta[m.rows]) * p.alpha[m.cols]
    assert abs(float(np.mean(z))) < 3 / math.sqrt(z.size)
    assert abs(float(np.mean(p.zeta))) < 1e-12


def test_slowness_spread_matches_request() -> None:
    truth = generate(SynthSpec(n_users=5000, n_questions=2, seed=4))
    assert float(np.std(truth.params.zeta, ddof=1)) == pytest.approx(1.16, rel=0.05)


def test_times_lie_on_grid_and_match_log_entries() -> None:
    truth = generate(SynthSpec(n_users=30, n_questions=10, seed=2))
    steps = truth.times / 2.0**-16
    assert np.array_equal(steps, np.round(steps))
    np.testing.assert_allclose(np.log(truth.times), truth.matrix.log_times, rtol=0, atol=0)


def test_impossible_mask_is_config_error() -> None:
    spec = SynthSpec(n_users=5, n_questions=5, missingness=0.99, max_mask_retries=2)
    with pytest.raises(ConfigurationError):
        generate(spec)


def test_three_questions_on_one_page() -> None:
    log = emit_event_log(_hand_truth([50.0, 70.0, 90.0]), questions_per_page=3)
    assert [(e.kind, e.timestamp - LOG_ORIGIN) for e in log.events] == [
        ("page_load", 0.0),
        ("submit", 50.0),
        ("submit", 120.0),
        ("submit", 210.0),
    ]
    observations, _, _ = extract_log(log)
    assert [o.response_time for o in observations] == [50.0, 70.0, 90.0]


@pytest.mark.parametrize("questions_per_page", [1, 3])
def test_emitted_log_reproduces_sampled_times(questions_per_page: int) -> None:
    truth = generate(SynthSpec(n_users=25, n_questions=9, missingness=0.3, seed=6))
    log = emit_event_log(truth, questions_per_page=questions_per_page)
    observations, _, tallies = extract_log(log)
    assert sum(tallies.values()) == 0
    assert all(o.attempt == 1 and o.correct for o in observations)
    extracted = {(o.user_id, o.question_id): o.response_time for o in observations}
    assert extracted == sampled_times(truth)


def test_page_layout_and_structure() -> None:
    assert [list(r) for r in page_layout(5, 2)] == [[0, 1], [2, 3], [4]]
    with pytest.raises(ConfigurationError):
        page_layout(5, 2, pages_per_course=4)
    truth = generate(SynthSpec(n_users=3, n_questions=5, missingness=0.0))
    structure = course_structure(truth, questions_per_page=2)
    assert len(structure.chapters) == 3
    assert structure.questions["q005"] == "p003"


def test_default_course_is_recovered() -> None:
    truth = generate(SynthSpec())
    fitted, _ = fit(truth.matrix)
    recovery = recovery_report(truth, fitted)
    assert recovery["zeta"].r is not None and recovery["zeta"].r >= 0.9
    assert recovery["beta"].rmse <= 0.3
    assert recovery["alpha"].r is not None and recovery["alpha"].r >= 0.6


def test_recovery_of_truth_itself_is_exact() -> None:
    truth = generate(SynthSpec(n_users=50, n_questions=8, seed=3))
    report = recovery_report(truth, truth.params)
    assert set(report) == {"zeta", "beta", "alpha"}
    for recovery in report.values():
        assert recovery.r == pytest.approx(1.0) and recovery.rmse == 0.0


def test_recovery_ignores_location_shift() -> None:
    truth = generate(SynthSpec(n_users=50, n_questions=8, seed=3))
    p = truth.params
    shifted = p.replace(beta=p.beta + 0.5, zeta=p.zeta - 0.5)
    for recovery in recovery_report(truth, shifted).values():
        assert recovery.rmse < 1e-12


def test_recovery_needs_every_truth_id() -> None:
    truth = generate(SynthSpec(n_users=5, n_questions=3, seed=3))
    p = truth.params
    partial = p.replace(user_ids=p.user_ids[:4], zeta=p.zeta[:4])
    with pytest.raises(ConsistencyError):
        recovery_report(truth, partial)


def test_truth_written(tmp_path: Path) -> None:
    truth = generate(SynthSpec(n_users=10, n_questions=4, seed=8))
    write_truth(truth, tmp_path)
    again = read_params_csv(tmp_path / "truth_params.csv")
    assert again.user_ids == truth.params.user_ids
    spec = SynthSpec.model_validate_json((tmp_path / "truth_spec.json").read_text())
    assert spec == truth.spec
