"""Pydantic schema for the learner/question qualification thresholds."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class QualificationConfig(BaseModel):
    """Thresholds deciding which learners, pairs and questions enter a fit."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    explored_fraction: float = Field(default=0.5, gt=0.0, le=1.0)
    max_attempts: int = Field(default=5, gt=0)
    min_users_per_question: int = Field(default=10, gt=0)
    min_questions_per_user: int = Field(default=10, gt=0)
    full_credit_threshold: float = Field(default=1.0, gt=0.0, le=1.0)
