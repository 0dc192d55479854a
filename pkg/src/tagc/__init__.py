"""Low-light enhancement with a single image-adaptive gamma, plus quality metrics.

Typical use::

    from tagc import load_image, enhance, save_image
    out, analysis = enhance(load_image("dark.png"))
    save_image(out, "bright.png")
"""

from .engine import (
    EnhancementConfig,
    TagcAnalysis,
    adaptive_gamma,
    analyze,
    apply_gamma,
    average_color_factor,
    enhance,
    fixed_gamma_baseline,
    luminance_factor,
)
from .errors import (
    ConfigError,
    DegenerateDistributionError,
    EmptyCorpusError,
    EmptySelectionError,
    ImageFormatError,
    ManifestError,
    MissingPathsError,
    RunError,
    ShapeError,
    TagcError,
)
from .image import ChannelStats, ImagePlanar, channel_means, load_image, save_image, to_grayscale
from .metrics import fsim, niqe_score, psnr, ssim

__version__ = "0.1.0"

__all__ = [
    "ChannelStats",
    "ConfigError",
    "DegenerateDistributionError",
    "EmptyCorpusError",
    "EmptySelectionError",
    "EnhancementConfig",
    "ImageFormatError",
    "ImagePlanar",
    "ManifestError",
    "MissingPathsError",
    "RunError",
    "ShapeError",
    "TagcAnalysis",
    "TagcError",
    "adaptive_gamma",
    "analyze",
    "apply_gamma",
    "average_color_factor",
    "channel_means",
    "enhance",
    "fixed_gamma_baseline",
    "fsim",
    "load_image",
    "luminance_factor",
    "niqe_score",
    "psnr",
    "save_image",
    "ssim",
    "to_grayscale",
]
