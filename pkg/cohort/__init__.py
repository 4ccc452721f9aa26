"""Learner/question qualification and per-subset response matrices."""

from .config import QualificationConfig
from .filters import apply_attempt_cap, drop_post_correct_seconds, prepare_observations
from .matrix import SUBSET_LABELS, ResponseMatrix, SubsetLabel, build_subsets, qualify_matrix
from .structure import CourseStructure, filter_explored

__all__ = [
    "SUBSET_LABELS",
    "CourseStructure",
    "QualificationConfig",
    "ResponseMatrix",
    "SubsetLabel",
    "apply_attempt_cap",
    "build_subsets",
    "drop_post_correct_seconds",
    "filter_explored",
    "prepare_observations",
    "qualify_matrix",
]
