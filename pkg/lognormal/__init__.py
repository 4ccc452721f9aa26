"""Log-normal response-time model: parameters, likelihood and fitting."""

from .config import FitConfig
from .fit import FitReport, fit, update_alpha_closed_form, update_location_params
from .objective import Gradient, nll, nll_gradient, standardized_residuals
from .params import (
    ModelParams,
    normalize_identifiability,
    predict_log_time,
    read_params_csv,
    write_params_csv,
)

__all__ = [
    "FitConfig",
    "FitReport",
    "Gradient",
    "ModelParams",
    "fit",
    "nll",
    "nll_gradient",
    "normalize_identifiability",
    "predict_log_time",
    "read_params_csv",
    "standardized_residuals",
    "update_alpha_closed_form",
    "update_location_params",
    "write_params_csv",
]
