"""PSNR and SSIM on normalized images."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from ..errors import ShapeError
from ..image import ImagePlanar, to_grayscale

__all__ = ["check_same_shape", "gaussian_kernel", "psnr", "ssim", "ssim_map"]


def check_same_shape(reference: ImagePlanar, test: ImagePlanar) -> None:
    if reference.shape != test.shape:
        raise ShapeError(
            f"reference {reference.shape} and test {test.shape} differ in (channels, height, width)"
        )


def psnr(reference: ImagePlanar, test: ImagePlanar) -> float:
    """Peak signal-to-noise ratio in dB with peak 1.0.

    The squared error is averaged over all channels jointly. Identical images
    give ``math.inf``.
    """
    check_same_shape(reference, test)
    diff = reference.data - test.data
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps centred on the middle sample."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _blur(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    out = ndimage.correlate1d(plane, taps, axis=0, mode="reflect")
    return ndimage.correlate1d(out, taps, axis=1, mode="reflect")


def ssim_map(
    reference: ImagePlanar,
    test: ImagePlanar,
    *,
    window_size: int = 11,
    sigma: float = 1.5,
    k1: float = 0.01,
    k2: float = 0.03,
    data_range: float = 1.0,
) -> np.ndarray:
    """Local SSIM at every pixel of the grayscale images.

    Windowed statistics use a separable Gaussian with reflective borders, so
    the map has the same size as the inputs.
    """
    check_same_shape(reference, test)
    if min(reference.height, reference.width) < window_size:
        raise ShapeError(
            f"image {reference.height}x{reference.width} is smaller than the "
            f"{window_size}x{window_size} SSIM window"
        )
    x = to_grayscale(reference).plane()
    y = to_grayscale(test).plane()
    taps = gaussian_kernel(window_size, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2

    mu_x = _blur(x, taps)
    mu_y = _blur(y, taps)
    mu_xy = mu_x * mu_y
    mu_x2 = mu_x * mu_x
    mu_y2 = mu_y * mu_y
    var_x = _blur(x * x, taps) - mu_x2
    var_y = _blur(y * y, taps) - mu_y2
    cov = _blur(x * y, taps) - mu_xy

    # Every term is written symmetrically so ssim(a, b) == ssim(b, a) bit for bit.
    num = (2.0 * mu_xy + c1) * (2.0 * cov + c2)
    den = (mu_x2 + mu_y2 + c1) * (var_x + var_y + c2)
    return num / den


def ssim(reference: ImagePlanar, test: ImagePlanar, **kwargs) -> float:
    """Mean structural similarity of the grayscale images.

    Keyword arguments (``window_size``, ``sigma``, ``k1``, ``k2``,
    ``data_range``) are forwarded to :func:`ssim_map`.
    """
    return float(np.mean(ssim_map(reference, test, **kwargs)))
