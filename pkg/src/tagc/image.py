"""Planar floating-point images and the 8-bit PNG/JPEG boundary.

Samples are stored as float64 in ``[0, 1]`` with shape ``(channels, height,
width)``. Codes are divided by 255 on load with no transfer-curve decoding,
and quantized back to 8 bits only when saving.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError, ShapeError

__all__ = [
    "LUMA_WEIGHTS",
    "ChannelStats",
    "ImagePlanar",
    "channel_means",
    "load_image",
    "quantize",
    "save_image",
    "to_grayscale",
]

# Rec.709 weights; shared by the luminance factor and every grayscale metric.
LUMA_WEIGHTS = (0.2126, 0.7152, 0.0722)

_READ_FORMATS = {"PNG", "JPEG"}


@dataclass(frozen=True, eq=False)
class ImagePlanar:
    """Immutable 1- or 3-channel image with samples in ``[0, 1]``.

    Args:
        data: Array of shape ``(channels, height, width)``. A 2-D array is
            taken as a single plane. The array is copied to float64 and
            marked read-only.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim == 2:
            arr = arr[np.newaxis]
        if arr.ndim != 3:
            raise ShapeError(f"expected (channels, height, width), got shape {arr.shape}")
        c, h, w = arr.shape
        if c not in (1, 3):
            raise ShapeError(f"channels must be 1 or 3, got {c}")
        if h < 1 or w < 1:
            raise ShapeError(f"empty image {h}x{w}")
        if not np.isfinite(arr).all():
            raise ValueError("image contains non-finite samples")
        lo, hi = arr.min(), arr.max()
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"samples must lie in [0, 1], got range [{lo}, {hi}]")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_hwc(cls, array) -> "ImagePlanar":
        """Build from an interleaved ``(height, width[, channels])`` array."""
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim == 3:
            arr = np.moveaxis(arr, -1, 0)
        return cls(arr)

    @classmethod
    def uniform(cls, value: float, height: int, width: int, channels: int = 3) -> "ImagePlanar":
        return cls(np.full((channels, height, width), value, dtype=np.float64))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def to_hwc(self) -> np.ndarray:
        """Interleaved copy, ``(height, width, channels)``."""
        return np.ascontiguousarray(np.moveaxis(self.data, 0, -1))

    def plane(self, index: int = 0) -> np.ndarray:
        return self.data[index]


@dataclass(frozen=True)
class ChannelStats:
    mean_r: float
    mean_g: float
    mean_b: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mean_r, self.mean_g, self.mean_b)


def load_image(path: str | os.PathLike) -> ImagePlanar:
    """Decode an 8-bit PNG or JPEG into an :class:`ImagePlanar`.

    Color sources give 3 channels, grayscale sources 1 channel. Alpha is
    dropped. Palette images are expanded to RGB.

    Raises:
        FileNotFoundError / OSError: the file cannot be opened.
        ImageFormatError: not a PNG/JPEG, or an unsupported mode or bit depth.
    """
    try:
        pil = Image.open(path)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: not a decodable image", prop="format") from exc
    with pil:
        if pil.format not in _READ_FORMATS:
            raise ImageFormatError(
                f"{path}: unsupported format {pil.format!r} (PNG or JPEG only)", prop="format"
            )
        mode = pil.mode
        if mode in ("RGB", "L"):
            pass
        elif mode == "RGBA":
            pil = pil.convert("RGB")
        elif mode == "LA":
            pil = pil.convert("L")
        elif mode == "P":
            pil = pil.convert("RGBA").convert("RGB")
        else:
            # '1', 'I;16', 'I', 'F', 'CMYK', 'YCbCr', ...
            raise ImageFormatError(
                f"{path}: unsupported mode {mode!r} (8-bit gray/RGB/RGBA/palette only)",
                prop="mode",
            )
        codes = np.asarray(pil, dtype=np.uint8)
    return ImagePlanar.from_hwc(codes.astype(np.float64) / 255.0)


def quantize(img: ImagePlanar | np.ndarray) -> np.ndarray:
    """8-bit codes in ``(height, width[, channels])`` layout.

    Accepts an image or a raw ``(channels, height, width)`` array, which may
    stray outside ``[0, 1]``. Rounds half away from zero after clamping.
    """
    data = img.data if isinstance(img, ImagePlanar) else np.asarray(img, dtype=np.float64)
    scaled = np.clip(data, 0.0, 1.0) * 255.0
    # Non-negative input: floor(x + 0.5) is round-half-away-from-zero.
    codes = np.floor(scaled + 0.5).astype(np.uint8)
    codes = np.moveaxis(codes, 0, -1)
    if codes.shape[-1] == 1:
        codes = codes[..., 0]
    return np.ascontiguousarray(codes)


def save_image(img: ImagePlanar, path: str | os.PathLike) -> None:
    """Write ``img`` as an 8-bit grayscale or RGB PNG."""
    codes = quantize(img)
    mode = "L" if codes.ndim == 2 else "RGB"
    Image.fromarray(codes, mode=mode).save(path, format="PNG")


def channel_means(img: ImagePlanar) -> ChannelStats:
    """Per-plane arithmetic means; a single plane fills all three fields."""
    means = img.data.mean(axis=(1, 2))
    if img.channels == 1:
        m = float(means[0])
        return ChannelStats(m, m, m)
    return ChannelStats(float(means[0]), float(means[1]), float(means[2]))


def luma(data: np.ndarray) -> np.ndarray:
    """Weighted sum of a ``(3, H, W)`` array along its first axis."""
    wr, wg, wb = LUMA_WEIGHTS
    return wr * data[0] + wg * data[1] + wb * data[2]


def to_grayscale(img: ImagePlanar) -> ImagePlanar:
    """Rec.709-weighted single plane. 1-channel input is returned as is."""
    if img.channels == 1:
        return img
    return ImagePlanar(np.clip(luma(img.data), 0.0, 1.0))
