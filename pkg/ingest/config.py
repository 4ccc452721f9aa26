"""Pydantic schema for response-time extraction settings."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from .extraction import FirstResponseRule


class ExtractionConfig(BaseModel):
    """How first responses are timed and which score counts as correct.

    ``full_credit_threshold`` falls back to the qualification threshold when
    left unset.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    first_response_rule: FirstResponseRule = "chain"
    full_credit_threshold: float | None = Field(default=None, gt=0.0, le=1.0)
