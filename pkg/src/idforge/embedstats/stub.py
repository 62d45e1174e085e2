"""Deterministic stand-in embedder so the pipeline runs without a CNN.

Features are per-patch gray histograms: the image is resized to a fixed
square, cut into a grid, and each patch contributes a normalized histogram.
Not a perceptual embedding; useful for wiring and for tests only.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import AssetError
from ..imaging import RasterImage, read_png, resize, to_grayscale
from .features import FeatureSet

SIDE = 64
GRID = 4
BINS = 16


def embed_image(img: RasterImage) -> np.ndarray:
    """256-dimensional patch-histogram feature vector (float32)."""
    gray = to_grayscale(resize(img, SIDE, SIDE)).pixels
    patch = SIDE // GRID
    feats = np.empty(GRID * GRID * BINS, dtype=np.float32)
    k = 0
    for gy in range(GRID):
        for gx in range(GRID):
            tile = gray[gy * patch:(gy + 1) * patch, gx * patch:(gx + 1) * patch]
            hist, _ = np.histogram(tile, bins=BINS, range=(0, 256))
            feats[k:k + BINS] = hist / tile.size
            k += BINS
    return feats


def embed_directory(images_dir: str | Path) -> FeatureSet:
    """Embed every PNG/JPEG in a directory, sorted by file name."""
    files = [f for f in sorted(Path(images_dir).iterdir())
             if f.suffix.lower() in (".png", ".jpg", ".jpeg")]
    if len(files) < 2:
        raise AssetError(f"need at least 2 images in {images_dir}, found {len(files)}")
    return FeatureSet(np.stack([embed_image(read_png(f)) for f in files]))
