"""Where the demos get their pictures: scikit-image samples if installed, else a synthetic scene."""

import numpy as np
from scipy import ndimage

from tagc import ImagePlanar


def scene(name: str = "astronaut") -> ImagePlanar:
    try:
        from skimage import data

        arr = getattr(data, name)()
        return ImagePlanar.from_hwc(arr / 255.0)
    except (ImportError, AttributeError):
        rng = np.random.default_rng(0)
        smooth = ndimage.gaussian_filter(rng.random((3, 256, 256)), (0, 6, 6))
        return ImagePlanar((smooth - smooth.min()) / np.ptp(smooth))


def low_light(img: ImagePlanar, exposure: float = 0.2, seed: int = 0) -> ImagePlanar:
    """Cut the exposure and add a little sensor noise."""
    rng = np.random.default_rng(seed)
    return ImagePlanar(np.clip(exposure * img.data**1.4 + rng.normal(0, 0.004, img.shape), 0, 1))
