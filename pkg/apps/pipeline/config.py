"""Run configuration: one JSON file plus command-line overrides."""

from __future__ import annotations

import json
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from cohort.config import QualificationConfig
from cohort.matrix import SubsetLabel
from ingest.config import ExtractionConfig
from lognormal.config import FitConfig
from rtmodel.exceptions import ConfigurationError, InputError
from synthetic.spec import SynthSpec


def _default_jobs() -> int:
    return int(getattr(settings, "RTMODEL_JOBS", 1))


class RunConfig(BaseModel):
    """Inputs, output directory and the settings of every stage."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    events: tuple[Path, ...] = ()
    structures: tuple[Path, ...] = ()
    learners: Path | None = None
    fits: Path | None = None
    out: Path = Path("out")
    qualification: QualificationConfig = QualificationConfig()
    extraction: ExtractionConfig = ExtractionConfig()
    fit: FitConfig = FitConfig()
    synth: SynthSpec = SynthSpec()
    questions_per_page: int = Field(default=1, ge=1)
    subsets: tuple[str, ...] = ()
    about_mean: bool = False
    jobs: int = Field(default_factory=_default_jobs, ge=1)
    seed: int | None = Field(default=None, ge=0)

    @field_validator("subsets")
    @classmethod
    def _check_subsets(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        for name in value:
            SubsetLabel.parse(name)
        return value

    @property
    def synth_spec(self) -> SynthSpec:
        """Synthetic spec with the run seed applied, when one is given."""
        if self.seed is None:
            return self.synth
        return self.synth.model_copy(update={"seed": self.seed})

    @property
    def credit_threshold(self) -> float:
        return self.extraction.full_credit_threshold or self.qualification.full_credit_threshold

    @property
    def scored_qualification(self) -> QualificationConfig:
        """Qualification thresholds carrying the credit threshold used at extraction."""
        return self.qualification.model_copy(
            update={"full_credit_threshold": self.credit_threshold}
        )

    def structure_paths(self) -> dict[str, Path]:
        """Course id → structure file, read from each file's ``course_id``."""
        by_course: dict[str, Path] = {}
        for path in self.structures:
            try:
                payload = json.loads(Path(path).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read course structure {path}: {exc}") from exc
            course_id = payload.get("course_id") if isinstance(payload, dict) else None
            if not course_id:
                raise ConfigurationError(f"course structure {path} has no course_id")
            by_course[str(course_id)] = Path(path)
        return by_course

    @classmethod
    def load(cls, path: Path | str | None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
        """Read ``path`` (if any) and apply ``overrides``; overrides win.

        Nested sections are merged key by key.

        Raises:
            InputError: The config file cannot be read.
            ConfigurationError: The merged configuration is invalid.
        """
        data: dict[str, Any] = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text(encoding="utf-8"))
            except OSError as exc:
                raise InputError(f"cannot read config {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigurationError(f"config {path} must hold a JSON object")
        for key, value in (overrides or {}).items():
            if isinstance(value, Mapping):
                data[key] = {**(data.get(key) or {}), **value}
            else:
                data[key] = value
        try:
            return cls.model_validate(data)
        except (ValidationError, ValueError) as exc:
            raise ConfigurationError(f"invalid configuration: {exc}") from exc
