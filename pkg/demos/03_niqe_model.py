"""Fit a NIQE model from pristine photos and score images without a reference.

Run:  python3 demos/03_niqe_model.py [pristine_dir]

Without a folder argument the scikit-image sample photos are used.
"""

import sys
from pathlib import Path

import numpy as np

from _images import scene
from tagc import ImagePlanar
from tagc.metrics.niqe import fit_niqe_model, fit_niqe_model_from_images, niqe_score, save_model

if len(sys.argv) > 1:
    model = fit_niqe_model(sys.argv[1])
else:
    names = ["camera", "coffee", "rocket", "brick", "grass", "gravel", "coins", "moon", "text", "motorcycle_left"]
    model = fit_niqe_model_from_images(scene(n) for n in names)

save_model(model, Path("niqe_model.json"))
print("model saved to niqe_model.json:", model.feature_mean.size, "features")

# %% Lower is better: noise and blur push the patch statistics away from the model.
img = scene("chelsea")
rng = np.random.default_rng(0)
noisy = ImagePlanar(np.clip(img.data + rng.normal(0, 0.1, img.shape), 0, 1))
for label, x in (("clean", img), ("noisy", noisy)):
    print(f"{label:6s} NIQE {niqe_score(x, model):.3f}")
