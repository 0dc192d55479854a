"""Natural Image Quality Evaluator (NIQE).

A pristine model is the mean and covariance of natural-scene-statistics
features pooled over sharp patches of high-quality photos. An image is scored
by the distance between the model and the same statistics measured on the
image's own sharp patches; lower is better.

Per patch and per scale, 18 features are measured on the mean-subtracted,
contrast-normalized (MSCN) coefficients: an asymmetric generalized Gaussian
fit of the coefficients themselves (shape, mean scale) and of their products
with the four neighbours (shape, mean, left scale, right scale).
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.special import gamma as gamma_fn
from scipy.special import gammaln

from ..errors import DegenerateDistributionError, EmptyCorpusError, EmptySelectionError, ShapeError
from ..image import ImagePlanar, load_image, to_grayscale
from .fullref import gaussian_kernel

__all__ = [
    "MODEL_VERSION",
    "NiqeModel",
    "fit_aggd",
    "fit_niqe_model",
    "fit_niqe_model_from_images",
    "load_model",
    "mscn_coefficients",
    "niqe_features",
    "niqe_score",
    "niqe_score_from_features",
    "save_model",
]

log = logging.getLogger(__name__)

MODEL_VERSION = 1
FEATURES_PER_SCALE = 18
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}

# Patches whose mean local deviation (0-255 scale) is below this are flat,
# whatever the relative threshold says.
_MIN_SHARPNESS = 1e-3

_SHAPE_GRID = np.round(np.arange(9801) * 0.001 + 0.2, 3)
_SHAPE_RATIO = np.exp(2.0 * gammaln(2.0 / _SHAPE_GRID) - gammaln(1.0 / _SHAPE_GRID) - gammaln(3.0 / _SHAPE_GRID))

_MSCN_TAPS = gaussian_kernel(7, 7.0 / 6.0)

# (row, col) shifts: horizontal, vertical, main diagonal, anti-diagonal.
_PAIR_SHIFTS = ((0, 1), (1, 0), (1, 1), (1, -1))


@dataclass(frozen=True, eq=False)
class NiqeModel:
    feature_mean: np.ndarray
    feature_cov: np.ndarray
    patch_size: int = 96
    scales: int = 2
    sharpness_fraction: float = 0.75
    version: int = MODEL_VERSION

    def __post_init__(self):
        mean = np.array(self.feature_mean, dtype=np.float64).reshape(-1)
        cov = np.array(self.feature_cov, dtype=np.float64)
        n = FEATURES_PER_SCALE * self.scales
        if mean.shape != (n,):
            raise ShapeError(f"feature_mean must have {n} entries, got {mean.shape}")
        if cov.shape != (n, n):
            raise ShapeError(f"feature_cov must be {n}x{n}, got {cov.shape}")
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise ValueError("model contains non-finite numbers")
        if np.abs(cov - cov.T).max() > 1e-10:
            raise ValueError("feature_cov is not symmetric")
        _check_patch_params(self.patch_size, self.scales, self.sharpness_fraction)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "feature_mean", mean)
        object.__setattr__(self, "feature_cov", cov)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "patch_size": self.patch_size,
            "scales": self.scales,
            "sharpness_fraction": self.sharpness_fraction,
            "feature_mean": self.feature_mean.tolist(),
            "feature_cov": self.feature_cov.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NiqeModel":
        missing = {"feature_mean", "feature_cov"} - d.keys()
        if missing:
            raise ValueError(f"NIQE model is missing fields: {sorted(missing)}")
        version = int(d.get("version", MODEL_VERSION))
        if version != MODEL_VERSION:
            raise ValueError(f"unsupported NIQE model version {version}")
        return cls(
            feature_mean=d["feature_mean"],
            feature_cov=d["feature_cov"],
            patch_size=int(d.get("patch_size", 96)),
            scales=int(d.get("scales", 2)),
            sharpness_fraction=float(d.get("sharpness_fraction", 0.75)),
            version=version,
        )


def save_model(model: NiqeModel, path: str | os.PathLike) -> None:
    # json writes floats with repr(), which round-trips float64 exactly.
    Path(path).write_text(json.dumps(model.to_dict(), indent=1) + "\n")


def load_model(path: str | os.PathLike) -> NiqeModel:
    return NiqeModel.from_dict(json.loads(Path(path).read_text()))


def _check_patch_params(patch_size, scales, sharpness_fraction):
    if scales < 1:
        raise ValueError(f"scales must be >= 1, got {scales}")
    if patch_size < 2 or patch_size % (2 ** (scales - 1)):
        raise ValueError(f"patch_size {patch_size} must be divisible by 2**(scales-1)")
    if not 0.0 <= sharpness_fraction < 1.0:
        raise ValueError(f"sharpness_fraction must lie in [0, 1), got {sharpness_fraction}")


def _mscn(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = ndimage.correlate1d(plane, _MSCN_TAPS, axis=0, mode="reflect")
    mu = ndimage.correlate1d(mu, _MSCN_TAPS, axis=1, mode="reflect")
    sq = ndimage.correlate1d(plane * plane, _MSCN_TAPS, axis=0, mode="reflect")
    sq = ndimage.correlate1d(sq, _MSCN_TAPS, axis=1, mode="reflect")
    sigma = np.sqrt(np.abs(sq - mu * mu))
    return (plane - mu) / (sigma + 1.0), sigma


def mscn_coefficients(img: ImagePlanar) -> np.ndarray:
    """MSCN coefficients of the grayscale image on the [0, 255] scale.

    Local mean and deviation use a 7x7 Gaussian window (sigma 7/6); the
    divisor is ``deviation + 1``.
    """
    return _mscn(to_grayscale(img).plane() * 255.0)[0]


def fit_aggd(samples) -> tuple[float, float, float]:
    """Moment-matching fit of an asymmetric generalized Gaussian.

    The shape is looked up on the grid 0.2, 0.201, ..., 10.

    Returns:
        ``(alpha, left_sigma, right_sigma)``: the shape and the left/right
        scale parameters. Mirroring the samples swaps the two scales.

    Raises:
        DegenerateDistributionError: fewer than 2 samples, or all zero.
    """
    v = np.asarray(samples, dtype=np.float64).reshape(-1)
    if v.size < 2:
        raise DegenerateDistributionError(f"need at least 2 samples, got {v.size}")
    sq = v * v
    mean_sq = sq.mean()
    if not mean_sq > 0:
        raise DegenerateDistributionError("all samples are zero")
    neg = sq[v < 0]
    pos = sq[v > 0]
    left_std = math.sqrt(neg.mean()) if neg.size else 0.0
    right_std = math.sqrt(pos.mean()) if pos.size else 0.0

    r_hat = float(np.abs(v).mean()) ** 2 / mean_sq
    # The skew correction is invariant under g -> 1/g; using the ratio <= 1
    # keeps mirrored inputs bit-identical, and a one-sided sample gives g=0.
    hi = max(left_std, right_std)
    g = min(left_std, right_std) / hi
    r_norm = r_hat * (g**3 + 1.0) * (g + 1.0) / (g * g + 1.0) ** 2

    alpha = float(_SHAPE_GRID[np.argmin((_SHAPE_RATIO - r_norm) ** 2)])
    ratio = math.sqrt(gamma_fn(1.0 / alpha) / gamma_fn(3.0 / alpha))
    return alpha, left_std * ratio, right_std * ratio


def _patch_features(patch: np.ndarray) -> np.ndarray:
    alpha, bl, br = fit_aggd(patch)
    feats = [alpha, (bl + br) / 2.0]
    for shift in _PAIR_SHIFTS:
        pair = patch * np.roll(patch, shift, axis=(0, 1))
        alpha, bl, br = fit_aggd(pair)
        mean = (br - bl) * math.exp(gammaln(2.0 / alpha) - gammaln(1.0 / alpha))
        feats.extend((alpha, mean, bl, br))
    return np.array(feats)


def _half_taps() -> np.ndarray:
    # Antialiased bicubic (a = -0.5) taps for a 2x reduction, at offsets -3.5..3.5.
    x = np.abs(np.arange(-3.5, 4.0, 1.0) / 2.0)
    w = np.where(
        x <= 1.0,
        1.5 * x**3 - 2.5 * x**2 + 1.0,
        np.where(x <= 2.0, -0.5 * x**3 + 2.5 * x**2 - 4.0 * x + 2.0, 0.0),
    )
    return w / w.sum()


_HALF_TAPS = _half_taps()


def _halve(plane: np.ndarray) -> np.ndarray:
    """Downscale an even-sized plane by 2 with the antialiased bicubic kernel."""
    taps = _HALF_TAPS
    out = plane
    for axis in (0, 1):
        n = out.shape[axis] // 2
        pad = [(0, 0), (0, 0)]
        pad[axis] = (4, 4)
        p = np.pad(out, pad, mode="symmetric")
        acc = np.zeros(out.shape[:axis] + (n,) + out.shape[axis + 1 :])
        for k, w in enumerate(taps):
            sl = [slice(None), slice(None)]
            sl[axis] = slice(1 + k, 1 + k + 2 * n, 2)
            acc += w * p[tuple(sl)]
        out = acc
    return out


def _blocks(plane: np.ndarray, size: int) -> np.ndarray:
    rows, cols = plane.shape[0] // size, plane.shape[1] // size
    return plane.reshape(rows, size, cols, size).swapaxes(1, 2).reshape(rows * cols, size, size)


def niqe_features(
    img: ImagePlanar,
    *,
    patch_size: int = 96,
    scales: int = 2,
    sharpness_fraction: float = 0.75,
) -> np.ndarray:
    """Feature vectors of the sharp patches of ``img``.

    The grayscale image is cropped to a whole number of patches. A patch is
    kept when its mean local deviation exceeds ``sharpness_fraction`` times
    the sharpest patch's; the same patches are used at every scale.

    Returns:
        Array of shape ``(n_selected, 18 * scales)``.

    Raises:
        ShapeError: the image is smaller than one patch.
        EmptySelectionError: no patch passes the sharpness gate.
    """
    _check_patch_params(patch_size, scales, sharpness_fraction)
    plane = to_grayscale(img).plane() * 255.0
    rows, cols = plane.shape[0] // patch_size, plane.shape[1] // patch_size
    if rows == 0 or cols == 0:
        raise ShapeError(f"image {plane.shape[0]}x{plane.shape[1]} is smaller than one {patch_size}px patch")
    plane = plane[: rows * patch_size, : cols * patch_size]

    per_scale = []
    keep = None
    for s in range(scales):
        size = patch_size >> s
        mscn, sigma = _mscn(plane)
        if keep is None:
            sharpness = _blocks(sigma, size).mean(axis=(1, 2))
            keep = np.flatnonzero(
                (sharpness > sharpness_fraction * sharpness.max()) & (sharpness > _MIN_SHARPNESS)
            )
            if keep.size == 0:
                raise EmptySelectionError("no patch passed the sharpness gate (flat image?)")
        patches = _blocks(mscn, size)[keep]
        feats = np.full((keep.size, FEATURES_PER_SCALE), np.nan)
        for i, patch in enumerate(patches):
            try:
                feats[i] = _patch_features(patch)
            except DegenerateDistributionError:
                pass
        per_scale.append(feats)
        if s + 1 < scales:
            plane = _halve(plane)

    features = np.hstack(per_scale)
    features = features[np.isfinite(features).all(axis=1)]
    if features.shape[0] == 0:
        raise EmptySelectionError("every selected patch was degenerate")
    return features


def _image_files(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def fit_niqe_model_from_images(
    images,
    *,
    patch_size: int = 96,
    scales: int = 2,
    sharpness_fraction: float = 0.75,
) -> NiqeModel:
    """Fit a pristine model from an iterable of images.

    Images that are too small or have no sharp patch are skipped.

    Raises:
        EmptyCorpusError: fewer than 2 usable patches in total.
    """
    pooled = []
    for img in images:
        try:
            pooled.append(
                niqe_features(img, patch_size=patch_size, scales=scales, sharpness_fraction=sharpness_fraction)
            )
        except (ShapeError, EmptySelectionError) as exc:
            log.info("skipping pristine image: %s", exc)
    n = sum(f.shape[0] for f in pooled)
    if n < 2:
        raise EmptyCorpusError(f"pristine corpus yielded {n} usable patches; need at least 2")
    feats = np.vstack(pooled)
    cov = np.cov(feats, rowvar=False)
    return NiqeModel(
        feature_mean=feats.mean(axis=0),
        feature_cov=(cov + cov.T) / 2.0,
        patch_size=patch_size,
        scales=scales,
        sharpness_fraction=sharpness_fraction,
    )


def fit_niqe_model(pristine_dir: str | os.PathLike, **kwargs) -> NiqeModel:
    """Fit a pristine model from every PNG/JPEG in ``pristine_dir``.

    Undecodable files are logged and skipped. Keyword arguments go to
    :func:`fit_niqe_model_from_images`.
    """
    directory = Path(pristine_dir)
    if not directory.is_dir():
        raise NotADirectoryError(str(directory))

    def images():
        for path in _image_files(directory):
            try:
                yield load_image(path)
            except (OSError, ValueError) as exc:
                log.warning("skipping %s: %s", path, exc)

    return fit_niqe_model_from_images(images(), **kwargs)


def niqe_score_from_features(features: np.ndarray, model: NiqeModel) -> float:
    """Distance between patch-feature statistics and the pristine model."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise EmptySelectionError("no patch features to score")
    if features.shape[1] != model.feature_mean.size:
        raise ShapeError(f"feature length {features.shape[1]} does not match model {model.feature_mean.size}")
    mu = features.mean(axis=0)
    if features.shape[0] > 1:
        cov = np.cov(features, rowvar=False)
    else:
        cov = np.zeros_like(model.feature_cov)
    pooled = (model.feature_cov + cov) / 2.0
    diff = model.feature_mean - mu
    if np.linalg.cond(pooled) < 1e12:
        dist2 = float(diff @ np.linalg.solve(pooled, diff))
    else:
        dist2 = float(diff @ np.linalg.pinv(pooled) @ diff)
    return math.sqrt(max(dist2, 0.0))


def niqe_score(img: ImagePlanar, model: NiqeModel, *, gate_sharpness: bool = False) -> float:
    """NIQE of ``img`` against ``model`` (lower is better).

    By default every non-flat patch of the test image contributes; the
    sharpness gate only shapes the pristine model. Pass
    ``gate_sharpness=True`` to apply the model's gate to the test image too.
    """
    feats = niqe_features(
        img,
        patch_size=model.patch_size,
        scales=model.scales,
        sharpness_fraction=model.sharpness_fraction if gate_sharpness else 0.0,
    )
    return niqe_score_from_features(feats, model)
