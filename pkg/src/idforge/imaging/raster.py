"""Raster primitives: grayscale, matting, resize, rotation, opacity, compositing.

All operations are pure: inputs are never mutated and identical inputs give
bit-identical outputs. Float work is float64; float-to-byte conversion always
rounds half-up so results are platform-stable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvariantError, RangeError


class PixelFormat(enum.Enum):
    GRAY8 = "gray8"
    RGBA8 = "rgba8"


def _round_u8(values: np.ndarray) -> np.ndarray:
    """Round half-up and clamp into a uint8 array."""
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Immutable pixel buffer: (h, w) uint8 for GRAY8, (h, w, 4) for RGBA8."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.uint8)
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 4:
            pass
        else:
            raise InvariantError(f"pixel buffer must be (h, w) or (h, w, 4), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvariantError(f"image dimensions must be >= 1, got {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def format(self) -> PixelFormat:
        return PixelFormat.GRAY8 if self.pixels.ndim == 2 else PixelFormat.RGBA8

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return (self.pixels.shape == other.pixels.shape
                and bool(np.array_equal(self.pixels, other.pixels)))

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height} {self.format.value})"

    @classmethod
    def new_gray(cls, width: int, height: int, value: int = 0) -> "RasterImage":
        if width < 1 or height < 1:
            raise RangeError(f"dimensions must be >= 1, got {width}x{height}")
        return cls(np.full((height, width), value, dtype=np.uint8))

    @classmethod
    def new_rgba(cls, width: int, height: int,
                 color: tuple[int, int, int, int] = (0, 0, 0, 0)) -> "RasterImage":
        if width < 1 or height < 1:
            raise RangeError(f"dimensions must be >= 1, got {width}x{height}")
        arr = np.empty((height, width, 4), dtype=np.uint8)
        arr[:, :] = color
        return cls(arr)


def to_grayscale(img: RasterImage) -> RasterImage:
    """BT.601 luma: round(0.299 R + 0.587 G + 0.114 B). Gray input is copied.

    Alpha is not folded into the luma; recover it with :func:`alpha_channel`.
    """
    if img.format is PixelFormat.GRAY8:
        return RasterImage(img.pixels)
    rgb = img.pixels[:, :, :3].astype(np.float64)
    luma = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return RasterImage(_round_u8(luma))


def alpha_channel(img: RasterImage) -> RasterImage:
    """The alpha plane as GRAY8; a gray image is fully opaque by definition."""
    if img.format is PixelFormat.GRAY8:
        return RasterImage(np.full_like(img.pixels, 255))
    return RasterImage(img.pixels[:, :, 3])


def gray_to_rgba(img: RasterImage, alpha: RasterImage | None = None) -> RasterImage:
    """Replicate a gray image into RGB, with an optional alpha plane."""
    if img.format is not PixelFormat.GRAY8:
        raise InvariantError("gray_to_rgba expects a GRAY8 image")
    h, w = img.pixels.shape
    out = np.empty((h, w, 4), dtype=np.uint8)
    out[:, :, 0] = out[:, :, 1] = out[:, :, 2] = img.pixels
    if alpha is None:
        out[:, :, 3] = 255
    else:
        if alpha.pixels.shape != (h, w) or alpha.format is not PixelFormat.GRAY8:
            raise InvariantError("alpha plane must be GRAY8 with matching dimensions")
        out[:, :, 3] = alpha.pixels
    return RasterImage(out)


def remove_background_threshold(img: RasterImage, threshold: int = 200) -> RasterImage:
    """Make gray pixels strictly brighter than `threshold` transparent.

    Kept pixels replicate their gray value into RGB with alpha 255.
    """
    if img.format is not PixelFormat.GRAY8:
        raise InvariantError("remove_background_threshold expects a GRAY8 image")
    if not (0 <= threshold <= 255):
        raise RangeError(f"threshold must be in [0, 255], got {threshold}")
    alpha = np.where(img.pixels > threshold, 0, 255).astype(np.uint8)
    return gray_to_rgba(img, RasterImage(alpha))


def remove_near_white(img: RasterImage, tolerance: int) -> RasterImage:
    """Zero the alpha of pixels whose min(R,G,B) >= 255 - tolerance."""
    if img.format is not PixelFormat.RGBA8:
        raise InvariantError("remove_near_white expects an RGBA8 image")
    if not (0 <= tolerance <= 255):
        raise RangeError(f"tolerance must be in [0, 255], got {tolerance}")
    out = img.pixels.copy()
    near_white = out[:, :, :3].min(axis=2) >= 255 - tolerance
    out[:, :, 3] = np.where(near_white, 0, out[:, :, 3])
    return RasterImage(out)


def apply_opacity(img: RasterImage, opacity: float) -> RasterImage:
    """Scale the alpha channel by `opacity` in [0, 1], rounding half-up."""
    if img.format is not PixelFormat.RGBA8:
        raise InvariantError("apply_opacity expects an RGBA8 image")
    if not (0.0 <= opacity <= 1.0):
        raise RangeError(f"opacity must be in [0, 1], got {opacity}")
    out = img.pixels.copy()
    out[:, :, 3] = _round_u8(out[:, :, 3].astype(np.float64) * opacity)
    return RasterImage(out)


def _premultiplied(img: RasterImage) -> np.ndarray:
    """RGBA float64 array with color channels premultiplied by alpha."""
    arr = img.pixels.astype(np.float64)
    out = np.empty_like(arr)
    a = arr[:, :, 3] / 255.0
    out[:, :, :3] = arr[:, :, :3] * a[:, :, None]
    out[:, :, 3] = arr[:, :, 3]
    return out


def _unpremultiply_to_u8(pre: np.ndarray) -> np.ndarray:
    a = pre[:, :, 3] / 255.0
    rgb = np.zeros_like(pre[:, :, :3])
    np.divide(pre[:, :, :3], a[:, :, None], out=rgb, where=a[:, :, None] > 0)
    out = np.empty(pre.shape, dtype=np.uint8)
    out[:, :, :3] = _round_u8(rgb)
    out[:, :, 3] = _round_u8(pre[:, :, 3])
    return out


def _bilinear_gather(src: np.ndarray, sx: np.ndarray, sy: np.ndarray,
                     outside_transparent: bool) -> np.ndarray:
    """Sample float64 planes at fractional coords (sx, sy).

    outside_transparent=False clamps coordinates to the border (resize
    semantics); True treats out-of-bounds neighbors as zero contribution
    (rotation semantics, zeros being transparent premultiplied pixels).
    """
    h, w = src.shape[:2]
    if not outside_transparent:
        sx = np.clip(sx, 0.0, w - 1.0)
        sy = np.clip(sy, 0.0, h - 1.0)
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0
    acc = np.zeros(sx.shape + src.shape[2:], dtype=np.float64)
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            xn = x0 + dx
            yn = y0 + dy
            xi = np.clip(xn, 0, w - 1).astype(np.intp)
            yi = np.clip(yn, 0, h - 1).astype(np.intp)
            weight = wx * wy
            if outside_transparent:
                inside = (xn >= 0) & (xn < w) & (yn >= 0) & (yn < h)
                weight = weight * inside
            sample = src[yi, xi]
            if sample.ndim > weight.ndim:
                weight = weight[..., None]
            acc += weight * sample
    return acc


def resize(img: RasterImage, width: int, height: int) -> RasterImage:
    """Bilinear resize to exactly (width, height).

    RGBA images are premultiplied for interpolation so transparent pixels do
    not bleed color.
    """
    if width < 1 or height < 1:
        raise RangeError(f"target dimensions must be >= 1, got {width}x{height}")
    if width == img.width and height == img.height:
        return RasterImage(img.pixels)
    sx = (np.arange(width, dtype=np.float64) + 0.5) * (img.width / width) - 0.5
    sy = (np.arange(height, dtype=np.float64) + 0.5) * (img.height / height) - 0.5
    gx, gy = np.meshgrid(sx, sy)
    if img.format is PixelFormat.GRAY8:
        out = _bilinear_gather(img.pixels.astype(np.float64), gx, gy, outside_transparent=False)
        return RasterImage(_round_u8(out))
    pre = _premultiplied(img)
    out = _bilinear_gather(pre, gx, gy, outside_transparent=False)
    return RasterImage(_unpremultiply_to_u8(out))


def rotate_ccw(img: RasterImage, degrees: float) -> RasterImage:
    """Rotate counterclockwise about the image center.

    The canvas expands to the rotated bounding box; regions with no source
    coverage come out fully transparent. Bilinear sampling on premultiplied
    color.
    """
    if img.format is not PixelFormat.RGBA8:
        raise InvariantError("rotate_ccw expects an RGBA8 image")
    theta = math.radians(degrees)
    c, s = math.cos(theta), math.sin(theta)
    w, h = img.width, img.height
    out_w = max(1, math.ceil(w * abs(c) + h * abs(s) - 1e-9))
    out_h = max(1, math.ceil(w * abs(s) + h * abs(c) - 1e-9))

    # Inverse-map output pixel centers back into source coordinates.
    # Visual CCW with a y-down axis maps rel (x, y) -> (xc + ys, -xs + yc),
    # whose inverse is (xc - ys, xs + yc).
    ox = np.arange(out_w, dtype=np.float64) + 0.5 - out_w / 2.0
    oy = np.arange(out_h, dtype=np.float64) + 0.5 - out_h / 2.0
    gx, gy = np.meshgrid(ox, oy)
    sx = c * gx - s * gy + w / 2.0 - 0.5
    sy = s * gx + c * gy + h / 2.0 - 0.5

    pre = _premultiplied(img)
    out = _bilinear_gather(pre, sx, sy, outside_transparent=True)
    return RasterImage(_unpremultiply_to_u8(out))


def composite(base: RasterImage, layer: RasterImage, x: int, y: int) -> RasterImage:
    """Source-over `layer` onto `base` with the layer's top-left at (x, y).

    Portions of the layer outside the base are clipped; base pixels outside
    the layer rectangle are preserved bit-exactly.
    """
    if base.format is not PixelFormat.RGBA8 or layer.format is not PixelFormat.RGBA8:
        raise InvariantError("composite expects RGBA8 images")
    out = base.pixels.copy()
    bx0, by0 = max(x, 0), max(y, 0)
    bx1, by1 = min(x + layer.width, base.width), min(y + layer.height, base.height)
    if bx0 >= bx1 or by0 >= by1:
        return RasterImage(out)
    sub_b = out[by0:by1, bx0:bx1].astype(np.float64)
    sub_l = layer.pixels[by0 - y:by1 - y, bx0 - x:bx1 - x].astype(np.float64)

    a_s = sub_l[:, :, 3] / 255.0
    a_b = sub_b[:, :, 3] / 255.0
    a_out = a_s + a_b * (1.0 - a_s)
    num = sub_l[:, :, :3] * a_s[:, :, None] + sub_b[:, :, :3] * (a_b * (1.0 - a_s))[:, :, None]
    rgb = np.zeros_like(num)
    np.divide(num, a_out[:, :, None], out=rgb, where=a_out[:, :, None] > 0)

    blended = np.empty(sub_b.shape, dtype=np.uint8)
    blended[:, :, :3] = _round_u8(rgb)
    blended[:, :, 3] = _round_u8(a_out * 255.0)
    out[by0:by1, bx0:bx1] = blended
    return RasterImage(out)


def crop(img: RasterImage, x: int, y: int, width: int, height: int) -> RasterImage:
    """Axis-aligned crop; the rectangle must lie within the image."""
    if width < 1 or height < 1:
        raise RangeError(f"crop dimensions must be >= 1, got {width}x{height}")
    if x < 0 or y < 0 or x + width > img.width or y + height > img.height:
        raise RangeError("crop rectangle outside image bounds")
    return RasterImage(img.pixels[y:y + height, x:x + width])
