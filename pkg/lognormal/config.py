"""Pydantic schema for optimizer settings."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class FitConfig(BaseModel):
    """Settings of the maximum-likelihood fit.

    ``rel_tol`` bounds the NLL decrease of one iteration relative to
    ``max(|NLL|, 1)``; below it the fit is reported as converged.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    rel_tol: float = Field(default=1e-9, gt=0.0)
    max_iter: int = Field(default=10_000, gt=0)
    alpha_cap: float = Field(default=1e3, gt=0.0)
    alpha_floor: float = Field(default=1e-6, gt=0.0)
    init: Literal["column_means", "zeros"] = "column_means"
    optimizer: Literal["block_coordinate", "conjugate_gradient"] = "block_coordinate"

    @model_validator(mode="after")
    def _check_bounds(self) -> FitConfig:
        if not self.alpha_floor < self.alpha_cap:
            raise ValueError("alpha_floor must be below alpha_cap")
        return self
