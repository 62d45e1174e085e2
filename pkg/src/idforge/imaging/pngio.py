"""PNG read/write for RasterImage buffers (Pillow-backed)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import AssetError
from .raster import PixelFormat, RasterImage


def read_png(path: str | Path) -> RasterImage:
    """Load an image file; grayscale files become GRAY8, all else RGBA8."""
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                return RasterImage(np.asarray(img, dtype=np.uint8))
            return RasterImage(np.asarray(img.convert("RGBA"), dtype=np.uint8))
    except (OSError, UnidentifiedImageError) as exc:
        raise AssetError(f"cannot decode image {path}: {exc}") from exc


def write_png(img: RasterImage, path: str | Path) -> None:
    mode = "L" if img.format is PixelFormat.GRAY8 else "RGBA"
    Image.fromarray(np.asarray(img.pixels), mode).save(path, format="PNG")


def png_bytes(img: RasterImage) -> bytes:
    """Encode to PNG in memory; used for byte-determinism checks."""
    import io

    buf = io.BytesIO()
    mode = "L" if img.format is PixelFormat.GRAY8 else "RGBA"
    Image.fromarray(np.asarray(img.pixels), mode).save(buf, format="PNG")
    return buf.getvalue()
