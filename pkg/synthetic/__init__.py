"""Synthetic courses with known parameters for validating the pipeline."""

from .events import course_structure, emit_event_log, page_layout, sampled_times
from .generator import SynthTruth, generate, quantize_times, write_truth
from .recovery import Recovery, recovery_report
from .spec import SynthSpec

__all__ = [
    "Recovery",
    "SynthSpec",
    "SynthTruth",
    "course_structure",
    "emit_event_log",
    "generate",
    "page_layout",
    "quantize_times",
    "recovery_report",
    "sampled_times",
    "write_truth",
]
