"""Raster primitives used by the document compositing pipeline."""

from .pngio import png_bytes, read_png, write_png
from .raster import (
    PixelFormat,
    RasterImage,
    alpha_channel,
    apply_opacity,
    composite,
    crop,
    gray_to_rgba,
    remove_background_threshold,
    remove_near_white,
    resize,
    rotate_ccw,
    to_grayscale,
)
from .text import TextRaster, font_codepoints, render_text

__all__ = [
    "PixelFormat",
    "RasterImage",
    "TextRaster",
    "alpha_channel",
    "apply_opacity",
    "composite",
    "crop",
    "font_codepoints",
    "gray_to_rgba",
    "png_bytes",
    "read_png",
    "remove_background_threshold",
    "remove_near_white",
    "render_text",
    "resize",
    "rotate_ccw",
    "to_grayscale",
    "write_png",
]
