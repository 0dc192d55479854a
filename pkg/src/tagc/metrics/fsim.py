"""Feature similarity (FSIM) on the grayscale plane.

Phase congruency comes from a frequency-domain log-Gabor bank with Kovesi's
noise compensation; gradient magnitude uses the 3x3 Scharr operator. Both
maps work on the [0, 255] scale so the stability constants keep their usual
values.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from ..image import ImagePlanar, to_grayscale
from .fullref import check_same_shape

__all__ = ["fsim", "gradient_magnitude", "phase_congruency"]

_SCHARR_X = np.array([[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]]) / 16.0
_SCHARR_Y = _SCHARR_X.T.copy()


def _freq_grid(n: int) -> np.ndarray:
    if n % 2:
        return np.arange(-(n - 1) / 2, (n - 1) / 2 + 1) / max(n - 1, 1)
    return np.arange(-n / 2, n / 2) / n


def _filter_bank(rows, cols, scales, orientations, min_wavelength, mult, sigma_onf, d_theta_on_sigma):
    """Log-Gabor transfer functions, shape ``(orientations, scales, rows, cols)``.

    Zero frequency sits at index ``[0, 0]``.
    """
    x, y = np.meshgrid(_freq_grid(cols), _freq_grid(rows))
    radius = np.fft.ifftshift(np.sqrt(x * x + y * y))
    theta = np.fft.ifftshift(np.arctan2(-y, x))
    sin_t, cos_t = np.sin(theta), np.cos(theta)

    # Butterworth low-pass keeps the corners of the spectrum out of the filters.
    lowpass = 1.0 / (1.0 + (radius / 0.45) ** 30)
    radius[0, 0] = 1.0

    log_sigma2 = 2.0 * math.log(sigma_onf) ** 2
    radial = []
    for s in range(scales):
        f0 = 1.0 / (min_wavelength * mult**s)
        lg = np.exp(-(np.log(radius / f0) ** 2) / log_sigma2) * lowpass
        lg[0, 0] = 0.0
        radial.append(lg)

    theta_sigma = math.pi / orientations / d_theta_on_sigma
    bank = np.empty((orientations, scales, rows, cols))
    for o in range(orientations):
        angle = o * math.pi / orientations
        ds = sin_t * math.cos(angle) - cos_t * math.sin(angle)
        dc = cos_t * math.cos(angle) + sin_t * math.sin(angle)
        dtheta = np.abs(np.arctan2(ds, dc))
        spread = np.exp(-(dtheta**2) / (2.0 * theta_sigma**2))
        for s in range(scales):
            bank[o, s] = radial[s] * spread
    return bank


def phase_congruency(
    plane: np.ndarray,
    *,
    scales: int = 4,
    orientations: int = 4,
    min_wavelength: float = 6.0,
    mult: float = 2.0,
    sigma_onf: float = 0.55,
    d_theta_on_sigma: float = 1.2,
    k: float = 2.0,
    noise_rescale: float = 1.7,
    epsilon: float = 1e-4,
) -> np.ndarray:
    """Phase congruency map of a 2-D array (any intensity scale).

    Energy below an estimated noise threshold is discarded per orientation;
    the threshold comes from the median response at the finest scale,
    treated as Rayleigh-distributed noise.
    """
    plane = np.asarray(plane, dtype=np.float64)
    rows, cols = plane.shape
    bank = _filter_bank(rows, cols, scales, orientations, min_wavelength, mult, sigma_onf, d_theta_on_sigma)
    spectrum = np.fft.fft2(plane)

    energy_all = np.zeros((rows, cols))
    amplitude_all = np.zeros((rows, cols))
    for o in range(orientations):
        eo = np.fft.ifft2(spectrum[np.newaxis] * bank[o], axes=(-2, -1))
        even, odd = eo.real, eo.imag
        amp = np.abs(eo)

        sum_e = even.sum(axis=0)
        sum_o = odd.sum(axis=0)
        x_energy = np.sqrt(sum_e * sum_e + sum_o * sum_o) + epsilon
        mean_e = sum_e / x_energy
        mean_o = sum_o / x_energy
        energy = (even * mean_e + odd * mean_o - np.abs(even * mean_o - odd * mean_e)).sum(axis=0)

        # Noise estimate from the smallest-scale response.
        em_n = float(np.sum(bank[o, 0] ** 2))
        median_e2n = float(np.median(amp[0] ** 2))
        noise_power = (-median_e2n / math.log(0.5)) / em_n

        spatial = np.fft.ifft2(bank[o], axes=(-2, -1)).real * math.sqrt(rows * cols)
        sum_an2 = float(np.sum(spatial**2))
        sum_ai_aj = 0.0
        for si in range(scales - 1):
            sum_ai_aj += float(np.sum(spatial[si] * spatial[si + 1 :]))
        noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_ai_aj
        tau = math.sqrt(max(noise_energy2, 0.0) / 2.0)
        threshold = tau * math.sqrt(math.pi / 2.0) + k * math.sqrt((2.0 - math.pi / 2.0) * tau * tau)
        threshold /= noise_rescale

        energy_all += np.maximum(energy - threshold, 0.0)
        amplitude_all += amp.sum(axis=0)

    return energy_all / (amplitude_all + np.finfo(np.float64).eps)


def gradient_magnitude(plane: np.ndarray, boundary: str = "reflect") -> np.ndarray:
    """Scharr gradient magnitude; ``boundary`` is a :mod:`scipy.ndimage` mode."""
    gx = ndimage.correlate(plane, _SCHARR_X, mode=boundary)
    gy = ndimage.correlate(plane, _SCHARR_Y, mode=boundary)
    return np.sqrt(gx * gx + gy * gy)


def _downsample(plane: np.ndarray, factor: int) -> np.ndarray:
    """Mean over non-overlapping ``factor x factor`` blocks (ragged edge cropped)."""
    if factor == 1:
        return plane
    h = plane.shape[0] // factor * factor
    w = plane.shape[1] // factor * factor
    blocks = plane[:h, :w].reshape(h // factor, factor, w // factor, factor)
    return blocks.mean(axis=(1, 3))


def _similarity(a: np.ndarray, b: np.ndarray, constant: float) -> np.ndarray:
    return (2.0 * (a * b) + constant) / (a * a + b * b + constant)


def fsim(
    reference: ImagePlanar,
    test: ImagePlanar,
    *,
    t1: float = 0.85,
    t2: float = 160.0,
    downsample: bool = True,
    boundary: str = "reflect",
    **pc_kwargs,
) -> float:
    """Feature similarity index of the grayscale images, in [0, 1].

    Args:
        reference: Reference image.
        test: Distorted image, same shape as ``reference``.
        t1: Stability constant of the phase-congruency similarity.
        t2: Stability constant of the gradient similarity ([0, 255] scale).
        downsample: Average-pool so the shorter side is about 256 pixels.
        boundary: Border mode of the gradient operator. ``"constant"``
            (zero padding) reproduces implementations built on plain 2-D
            convolution.
        **pc_kwargs: Overrides for :func:`phase_congruency` (``scales``,
            ``orientations``, ``min_wavelength``, ...).
    """
    check_same_shape(reference, test)
    y1 = to_grayscale(reference).plane() * 255.0
    y2 = to_grayscale(test).plane() * 255.0
    if downsample:
        factor = max(1, round(min(y1.shape) / 256))
        y1, y2 = _downsample(y1, factor), _downsample(y2, factor)

    pc1 = phase_congruency(y1, **pc_kwargs)
    pc2 = phase_congruency(y2, **pc_kwargs)
    g1 = gradient_magnitude(y1, boundary)
    g2 = gradient_magnitude(y2, boundary)

    sim = _similarity(pc1, pc2, t1) * _similarity(g1, g2, t2)
    pc_max = np.maximum(pc1, pc2)
    weight = float(pc_max.sum())
    if weight <= 0.0:
        # Featureless pair (e.g. two flat images): fall back to uniform weights.
        return float(np.clip(sim.mean(), 0.0, 1.0))
    return float(np.clip((sim * pc_max).sum() / weight, 0.0, 1.0))
