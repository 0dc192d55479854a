"""Full-reference (PSNR, SSIM, FSIM) and no-reference (NIQE) quality metrics."""

from .fsim import fsim, gradient_magnitude, phase_congruency
from .fullref import psnr, ssim, ssim_map
from .niqe import (
    NiqeModel,
    fit_aggd,
    fit_niqe_model,
    fit_niqe_model_from_images,
    load_model,
    mscn_coefficients,
    niqe_features,
    niqe_score,
    save_model,
)

__all__ = [
    "NiqeModel",
    "fit_aggd",
    "fit_niqe_model",
    "fit_niqe_model_from_images",
    "fsim",
    "gradient_magnitude",
    "load_model",
    "mscn_coefficients",
    "niqe_features",
    "niqe_score",
    "phase_congruency",
    "psnr",
    "save_model",
    "ssim",
    "ssim_map",
]
