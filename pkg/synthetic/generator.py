"""Draw ground-truth parameters and a response matrix from the log-normal model.

Randomness for slowness, intensity, discrimination, the observation mask and
the noise comes from separate streams spawned off one ``SeedSequence``, so a
spec with a given seed always yields the same truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import structlog

from cohort.matrix import ResponseMatrix, SubsetLabel
from lognormal.params import ModelParams, write_params_csv
from rtmodel.exceptions import ConfigurationError

from .spec import SynthSpec

logger = structlog.get_logger(__name__)

# Sampled times live on this grid so event timestamps reproduce them exactly
TIME_GRID = 2.0**-16


@dataclass(frozen=True, eq=False)
class SynthTruth:
    """True parameters, the generated matrix and the seconds behind each entry.

    ``times`` is aligned with the matrix entries and ``matrix.log_times`` is
    its natural log.
    """

    spec: SynthSpec
    params: ModelParams
    matrix: ResponseMatrix
    times: np.ndarray

    @property
    def course_id(self) -> str:
        return self.spec.course_id


def _ids(prefix: str, count: int) -> tuple[str, ...]:
    width = max(len(str(count)), 3)
    return tuple(f"{prefix}{i:0{width}d}" for i in range(1, count + 1))


def quantize_times(times: np.ndarray) -> np.ndarray:
    """Round seconds to the nearest :data:`TIME_GRID` step, never below one step."""
    return np.maximum(np.round(times / TIME_GRID), 1.0) * TIME_GRID


def _observation_mask(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    for attempt in range(1, spec.max_mask_retries + 1):
        mask = rng.random((spec.n_users, spec.n_questions)) >= spec.missingness
        if mask.any(axis=1).all() and mask.any(axis=0).all():
            if attempt > 1:
                logger.debug("synthetic.mask_resampled", attempts=attempt)
            return mask
    raise ConfigurationError(
        f"missingness {spec.missingness} leaves an empty row or column after "
        f"{spec.max_mask_retries} draws"
    )


def generate(spec: SynthSpec) -> SynthTruth:
    """Sample a course: ``ln t_qu = beta_q + zeta_u + z / alpha_q`` on observed cells.

    Slowness is recentred to mean exactly zero after sampling.

    Raises:
        ConfigurationError: No mask without empty rows or columns was found.
    """
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(spec.seed).spawn(5)]
    zeta_rng, beta_rng, alpha_rng, mask_rng, noise_rng = streams

    zeta = zeta_rng.normal(0.0, spec.zeta_sd, spec.n_users)
    zeta -= zeta.mean()
    beta = beta_rng.normal(spec.beta_mean, spec.beta_sd, spec.n_questions)
    alpha = np.exp(alpha_rng.normal(spec.alpha_log_mean, spec.alpha_log_sd, spec.n_questions))

    rows, cols = np.nonzero(_observation_mask(spec, mask_rng))
    noise = noise_rng.standard_normal(rows.size)
    times = quantize_times(np.exp(beta[cols] + zeta[rows] + noise / alpha[cols]))

    user_ids = _ids("u", spec.n_users)
    question_ids = _ids("q", spec.n_questions)
    matrix = ResponseMatrix(
        label=SubsetLabel(1, "any"),
        user_ids=user_ids,
        question_ids=question_ids,
        rows=rows,
        cols=cols,
        log_times=np.log(times),
    )
    params = ModelParams(
        question_ids=question_ids, user_ids=user_ids, alpha=alpha, beta=beta, zeta=zeta
    )
    times.setflags(write=False)
    logger.info(
        "synthetic.generated",
        course=spec.course_id,
        seed=spec.seed,
        users=spec.n_users,
        questions=spec.n_questions,
        observations=matrix.n_observations,
    )
    return SynthTruth(spec=spec, params=params, matrix=matrix, times=times)


def write_truth(truth: SynthTruth, directory: Path) -> None:
    """Write ``truth_params.csv`` and ``truth_spec.json``."""
    directory.mkdir(parents=True, exist_ok=True)
    write_params_csv(truth.params, directory / "truth_params.csv")
    (directory / "truth_spec.json").write_text(
        truth.spec.model_dump_json(indent=2) + "\n", encoding="utf-8"
    )
