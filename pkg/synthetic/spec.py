"""Pydantic schema of a synthetic course."""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field


class SynthSpec(BaseModel):
    """Size, missingness and parameter distributions of a generated course.

    Defaults follow typical first-attempt fits: median time intensity near
    ``ln 164 s``, median discrimination 0.511 and slowness sd 1.16.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_users: int = Field(default=500, ge=1)
    n_questions: int = Field(default=60, ge=1)
    missingness: float = Field(default=0.25, ge=0.0, lt=1.0)
    zeta_sd: float = Field(default=1.16, ge=0.0)
    beta_mean: float = 5.1
    beta_sd: float = Field(default=1.0, ge=0.0)
    alpha_log_mean: float = math.log(0.511)
    alpha_log_sd: float = Field(default=0.3, ge=0.0)
    seed: int = Field(default=0, ge=0)
    course_id: str = Field(default="synthetic", min_length=1)
    max_mask_retries: int = Field(default=100, ge=1)
