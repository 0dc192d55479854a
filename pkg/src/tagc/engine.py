"""TAGC: one image-adaptive gamma curve for low-light enhancement.

One gamma is derived per image from its channel means and applied to every
sample of every channel:

    L     = 0.2126 R + 0.7152 G + 0.0722 B        (means of the planes)
    mu    = (R + G + B) / 3
    gamma = gamma_control + (0.5 - L)(1 - mu) - 2 L
    out   = amplitude * in ** (2 / gamma)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .image import LUMA_WEIGHTS, ChannelStats, ImagePlanar, channel_means

__all__ = [
    "EnhancementConfig",
    "TagcAnalysis",
    "adaptive_gamma",
    "analyze",
    "apply_gamma",
    "average_color_factor",
    "enhance",
    "fixed_gamma_baseline",
    "luminance_factor",
]

# gamma is minimised at L=1, mu=0 where it equals gamma_control - 2.5.
MIN_GAMMA_CONTROL = 2.5


@dataclass(frozen=True)
class EnhancementConfig:
    gamma_control: float = 5.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ConfigError(f"amplitude must be > 0, got {self.amplitude}")
        if not self.gamma_control > MIN_GAMMA_CONTROL:
            raise ConfigError(
                f"gamma_control must be > {MIN_GAMMA_CONTROL} so that gamma stays positive, "
                f"got {self.gamma_control}"
            )


@dataclass(frozen=True)
class TagcAnalysis:
    stats: ChannelStats
    luminance: float
    avg_color: float
    gamma: float

    def as_dict(self) -> dict:
        return {
            "mean_r": self.stats.mean_r,
            "mean_g": self.stats.mean_g,
            "mean_b": self.stats.mean_b,
            "luminance": self.luminance,
            "avg_color": self.avg_color,
            "gamma": self.gamma,
        }


def luminance_factor(stats: ChannelStats) -> float:
    wr, wg, wb = LUMA_WEIGHTS
    return wr * stats.mean_r + wg * stats.mean_g + wb * stats.mean_b


def average_color_factor(stats: ChannelStats) -> float:
    return (stats.mean_r + stats.mean_g + stats.mean_b) / 3.0


def adaptive_gamma(L: float, mu: float, cfg: EnhancementConfig | None = None) -> float:
    """Gamma from luminance ``L`` and average color ``mu``, both in [0, 1].

    With the default config the result lies in [2.5, 5.5].
    """
    cfg = cfg or EnhancementConfig()
    if not (0.0 <= L <= 1.0 and 0.0 <= mu <= 1.0):
        raise ValueError(f"L and mu must lie in [0, 1], got L={L}, mu={mu}")
    gamma = cfg.gamma_control + (0.5 - L) * (1.0 - mu) - 2.0 * L
    if not gamma > 0:
        raise ConfigError(f"gamma_control={cfg.gamma_control} yields non-positive gamma {gamma}")
    return gamma


def apply_gamma(img: ImagePlanar, gamma: float, amplitude: float = 1.0) -> ImagePlanar:
    """Map every sample ``v`` to ``clip(amplitude * v ** (2 / gamma), 0, 1)``."""
    if not gamma > 0:
        raise ConfigError(f"gamma must be > 0, got {gamma}")
    if not amplitude > 0:
        raise ConfigError(f"amplitude must be > 0, got {amplitude}")
    out = np.power(img.data, 2.0 / gamma)
    if amplitude != 1.0:
        out *= amplitude
        np.clip(out, 0.0, 1.0, out=out)
    return ImagePlanar(out)


def analyze(img: ImagePlanar, cfg: EnhancementConfig | None = None) -> TagcAnalysis:
    stats = channel_means(img)
    L = luminance_factor(stats)
    mu = average_color_factor(stats)
    # Weighted sums can overshoot 1 by an ulp on near-white images.
    L, mu = min(max(L, 0.0), 1.0), min(max(mu, 0.0), 1.0)
    return TagcAnalysis(stats=stats, luminance=L, avg_color=mu, gamma=adaptive_gamma(L, mu, cfg))


def enhance(
    img: ImagePlanar, cfg: EnhancementConfig | None = None
) -> tuple[ImagePlanar, TagcAnalysis]:
    """Enhance a low-light image with a single image-wide adaptive gamma.

    Returns:
        The enhanced image and the analysis record (channel means, L, mu,
        gamma) used to produce it.
    """
    cfg = cfg or EnhancementConfig()
    analysis = analyze(img, cfg)
    return apply_gamma(img, analysis.gamma, cfg.amplitude), analysis


def fixed_gamma_baseline(img: ImagePlanar, gamma: float) -> ImagePlanar:
    """Conventional correction with a constant gamma (``gamma=2`` is the identity)."""
    if not gamma > 0:
        raise ConfigError(f"gamma must be > 0, got {gamma}")
    return apply_gamma(img, gamma, 1.0)
