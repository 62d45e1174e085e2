"""Text rasterization on top of Pillow's FreeType binding.

Glyph coverage is checked against the font's own cmap table (parsed here)
instead of trusting the renderer, so absent characters are detected and
substituted with '?' deterministically.
"""

from __future__ import annotations

import functools
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import ImageFont

from ..errors import FontError, GlyphError
from .raster import RasterImage, _round_u8

SUBSTITUTE_CHAR = "?"


@dataclass(frozen=True)
class TextRaster:
    """A rendered glyph run: tight-bounds image plus baseline metadata.

    `baseline` is the y offset of the first line's baseline from the top of
    the image; `missing` lists characters that had no glyph and were drawn
    as '?'.
    """

    image: RasterImage
    baseline: int
    missing: tuple[str, ...] = ()


def _read_exact(data: bytes, offset: int, size: int) -> bytes:
    if offset + size > len(data):
        raise FontError("font file truncated")
    return data[offset:offset + size]


def _parse_cmap_format4(data: bytes, base: int) -> set[int]:
    seg_count = struct.unpack_from(">H", data, base + 6)[0] // 2
    ends = struct.unpack_from(f">{seg_count}H", data, base + 14)
    starts_off = base + 16 + 2 * seg_count
    starts = struct.unpack_from(f">{seg_count}H", data, starts_off)
    deltas = struct.unpack_from(f">{seg_count}h", data, starts_off + 2 * seg_count)
    range_off_pos = starts_off + 4 * seg_count
    range_offsets = struct.unpack_from(f">{seg_count}H", data, range_off_pos)
    covered: set[int] = set()
    for i in range(seg_count):
        start, end = starts[i], ends[i]
        if start == 0xFFFF:
            continue
        for code in range(start, end + 1):
            if range_offsets[i] == 0:
                glyph = (code + deltas[i]) & 0xFFFF
            else:
                idx_pos = range_off_pos + 2 * i + range_offsets[i] + 2 * (code - start)
                if idx_pos + 2 > len(data):
                    continue
                glyph = struct.unpack_from(">H", data, idx_pos)[0]
                if glyph != 0:
                    glyph = (glyph + deltas[i]) & 0xFFFF
            if glyph != 0:
                covered.add(code)
    return covered


def _parse_cmap_format12(data: bytes, base: int) -> set[int]:
    n_groups = struct.unpack_from(">I", data, base + 12)[0]
    covered: set[int] = set()
    for g in range(n_groups):
        start, end, _start_glyph = struct.unpack_from(">III", data, base + 16 + 12 * g)
        covered.update(range(start, end + 1))
    return covered


@functools.lru_cache(maxsize=8)
def font_codepoints(font_path: str) -> frozenset[int]:
    """Codepoints with a glyph in the font, read from its cmap table."""
    try:
        data = Path(font_path).read_bytes()
    except OSError as exc:
        raise FontError(f"cannot read font file {font_path}: {exc}") from exc
    try:
        version, num_tables = struct.unpack_from(">IH", data, 0)
        if version not in (0x00010000, 0x4F54544F, 0x74727565):
            raise FontError(f"not a scalable font (sfnt version 0x{version:08x})")
        cmap_offset = None
        for i in range(num_tables):
            tag, _chk, off, _length = struct.unpack_from(">4sIII", data, 12 + 16 * i)
            if tag == b"cmap":
                cmap_offset = off
                break
        if cmap_offset is None:
            raise FontError("font has no cmap table")
        n_sub = struct.unpack_from(">H", data, cmap_offset + 2)[0]
        subtables = []
        for i in range(n_sub):
            plat, enc, sub_off = struct.unpack_from(">HHI", data, cmap_offset + 4 + 8 * i)
            subtables.append((plat, enc, cmap_offset + sub_off))
        # Prefer a full Unicode table, then the BMP one.
        preference = [(3, 10), (0, 4), (0, 6), (3, 1), (0, 3), (0, 2), (0, 1), (0, 0)]
        for want in preference:
            for plat, enc, off in subtables:
                if (plat, enc) != want:
                    continue
                fmt = struct.unpack_from(">H", data, off)[0]
                if fmt == 12:
                    return frozenset(_parse_cmap_format12(data, off))
                if fmt == 4:
                    return frozenset(_parse_cmap_format4(data, off))
        raise FontError("no supported cmap subtable (format 4 or 12)")
    except struct.error as exc:
        raise FontError(f"malformed font file {font_path}: {exc}") from exc


@functools.lru_cache(maxsize=32)
def _load_font(font_path: str, size_px: int) -> ImageFont.FreeTypeFont:
    try:
        return ImageFont.truetype(font_path, size_px)
    except OSError as exc:
        raise FontError(f"cannot load font {font_path}: {exc}") from exc


def render_text(text: str, font: str | Path, size_px: int,
                color: tuple[int, int, int, int] = (0, 0, 0, 255),
                strict: bool = False) -> TextRaster:
    """Rasterize a text run with anti-aliased alpha, cropped to its ink.

    Newlines stack lines at the font's ascent+descent advance. Characters
    absent from the font are replaced by '?' and reported in the result
    (raised as GlyphError when strict=True). The empty string renders as a
    1x1 fully transparent image.
    """
    font_path = str(font)
    ttf = _load_font(font_path, size_px)
    coverage = font_codepoints(font_path)

    missing = tuple(sorted({ch for ch in text
                            if ch != "\n" and ord(ch) not in coverage}))
    if missing and strict:
        raise GlyphError(missing)
    if missing:
        table = {ord(ch): SUBSTITUTE_CHAR for ch in missing}
        text = text.translate(table)

    ascent, descent = ttf.getmetrics()
    line_height = ascent + descent
    lines = text.split("\n")

    placed = []  # (mask array, x, y) in canvas coordinates
    canvas_w, canvas_h = 1, max(1, line_height * len(lines))
    for k, line in enumerate(lines):
        if not line:
            continue
        mask, offset = ttf.getmask2(line, mode="L")
        mw, mh = mask.size
        if mw == 0 or mh == 0:
            continue
        arr = np.asarray(mask, dtype=np.uint8).reshape(mh, mw)
        x, y = offset[0], k * line_height + offset[1]
        placed.append((arr, x, y))
        canvas_w = max(canvas_w, x + mw)
        canvas_h = max(canvas_h, y + mh)

    if not placed:
        return TextRaster(RasterImage.new_rgba(1, 1), baseline=0, missing=missing)

    alpha = np.zeros((canvas_h, canvas_w), dtype=np.uint8)
    for arr, x, y in placed:
        region = alpha[y:y + arr.shape[0], x:x + arr.shape[1]]
        np.maximum(region, arr, out=region)

    ys, xs = np.nonzero(alpha)
    y0, y1 = int(ys.min()), int(ys.max()) + 1
    x0, x1 = int(xs.min()), int(xs.max()) + 1
    ink = alpha[y0:y1, x0:x1]

    out = np.empty((ink.shape[0], ink.shape[1], 4), dtype=np.uint8)
    out[:, :, 0] = color[0]
    out[:, :, 1] = color[1]
    out[:, :, 2] = color[2]
    out[:, :, 3] = _round_u8(ink.astype(np.float64) * (color[3] / 255.0))
    return TextRaster(RasterImage(out), baseline=ascent - y0, missing=missing)
