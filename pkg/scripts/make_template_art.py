#!/usr/bin/env python3
"""Regenerate the builtin template background PNGs.

The art is procedural and deterministic: gradient body, header band, flag
mark, mountain silhouette, field captions. Placements mirror the builtin
layout JSONs; these backgrounds are placeholders, not official artwork.

Usage: python scripts/make_template_art.py  (writes into src/idforge/assets)
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from idforge.imaging import RasterImage, composite, render_text, write_png  # noqa: E402

FONT = REPO / "src/idforge/assets/fonts/DejaVuSans.ttf"
TEMPLATES = REPO / "src/idforge/assets/templates"

CAPTIONS = {
    "surnames": "APELLIDOS",
    "given_names": "NOMBRES",
    "nationality": "NACIONALIDAD",
    "gender": "SEXO",
    "birth_date": "FECHA DE NACIMIENTO",
    "document_number": "NUMERO DOCUMENTO",
    "issue_date": "FECHA DE EMISION",
    "expiry_date": "FECHA DE VENCIMIENTO",
    "run": "RUN",
}


def base_canvas(w: int, h: int) -> np.ndarray:
    """Warm vertical gradient with a faint horizontal sheen."""
    y = np.linspace(0.0, 1.0, h)[:, None]
    x = np.linspace(0.0, 1.0, w)[None, :]
    r = 236 + 14 * (1 - y) + 4 * np.sin(x * 9.3)
    g = 238 + 10 * (1 - y) + 3 * np.sin(x * 7.1 + 1.0)
    b = 242 + 8 * (1 - y) + 3 * np.sin(x * 5.7 + 2.0)
    arr = np.stack([r, g, b], axis=2)
    rgba = np.empty((h, w, 4), dtype=np.uint8)
    rgba[:, :, :3] = np.clip(arr, 0, 255).astype(np.uint8)
    rgba[:, :, 3] = 255
    return rgba


def paint_rect(arr: np.ndarray, x0, y0, x1, y1, color):
    arr[y0:y1, x0:x1, :3] = color
    arr[y0:y1, x0:x1, 3] = 255


def paint_mountains(arr: np.ndarray, y_base: int, amplitude: int, color, alpha: float):
    h, w = arr.shape[:2]
    xs = np.arange(w)
    ridge = (y_base
             - amplitude * np.abs(np.sin(xs * 0.018))
             - 0.6 * amplitude * np.abs(np.sin(xs * 0.041 + 1.3))).astype(int)
    for x in range(w):
        top = max(0, ridge[x])
        band = arr[top:y_base, x, :3].astype(np.float64)
        arr[top:y_base, x, :3] = (band * (1 - alpha) + np.array(color) * alpha).astype(np.uint8)


def paint_star(arr: np.ndarray, cx: int, cy: int, radius: int, color):
    for angle in np.linspace(0, 2 * np.pi, 5, endpoint=False):
        for t in np.linspace(0, 1, radius * 4):
            x = int(round(cx + t * radius * np.sin(angle)))
            y = int(round(cy - t * radius * np.cos(angle)))
            arr[max(0, y - 1):y + 1, max(0, x - 1):x + 1, :3] = color


def caption_layer(img: RasterImage, text: str, size: int, x: int, y: int) -> RasterImage:
    raster = render_text(text, FONT, size, (110, 118, 140, 255))
    return composite(img, raster.image, x, y)


def build(name: str, title_extra: str | None) -> None:
    layout = json.loads((TEMPLATES / f"{name}.json").read_text())
    w, h = layout["canvas"]["width"], layout["canvas"]["height"]
    scale = w / 742.0

    arr = base_canvas(w, h)
    header_h = int(42 * scale)
    paint_rect(arr, 0, 0, w, header_h, (154, 45, 52))
    paint_rect(arr, 0, header_h, w, header_h + max(2, int(3 * scale)), (190, 150, 60))
    paint_mountains(arr, int(h * 0.72), int(h * 0.22), (176, 188, 205), 0.35)
    # flag mark: blue canton + red lower band
    fx, fy, fs = int(14 * scale), int(8 * scale), int(26 * scale)
    paint_rect(arr, fx, fy, fx + fs, fy + fs // 2, (40, 60, 130))
    paint_rect(arr, fx + fs, fy, fx + 3 * fs, fy + fs // 2, (240, 240, 245))
    paint_rect(arr, fx, fy + fs // 2, fx + 3 * fs, fy + fs, (180, 40, 45))
    paint_star(arr, fx + fs // 2, fy + fs // 4, max(3, fs // 5), (250, 250, 250))

    img = RasterImage(arr)
    title_size = max(10, int(20 * scale))
    img = caption_layer(img, "REPUBLICA DE CHILE", title_size, int(110 * scale), int(8 * scale))
    sub = render_text("SERVICIO DE REGISTRO CIVIL E IDENTIFICACION", FONT,
                      max(7, int(11 * scale)), (235, 220, 220, 255))
    img = composite(img, sub.image, int(112 * scale), int(8 * scale) + title_size + 4)
    img = caption_layer(img, "CEDULA DE IDENTIDAD", max(9, int(15 * scale)),
                        int(14 * scale), header_h + int(12 * scale))
    if title_extra:
        banner = render_text(title_extra, FONT, max(10, int(17 * scale)),
                             (154, 45, 52, 255))
        img = composite(img, banner.image, w - banner.image.width - int(16 * scale),
                        header_h + int(10 * scale))

    for comp in layout["components"]:
        key = comp.get("field_key")
        if key in CAPTIONS:
            size = max(6, int(comp["font_size_px"] * 0.55))
            img = caption_layer(img, CAPTIONS[key], size,
                                comp["x"], max(0, comp["y"] - size - 4))
    # signature rule line
    sig = next(c for c in layout["components"] if c["kind"] == "signature")
    arr2 = np.array(img.pixels)
    y_line = min(h - 2, sig["y"] + sig["height"] + 2)
    paint_rect(arr2, sig["x"], y_line, sig["x"] + sig["width"], y_line + 1, (90, 95, 115))
    img = RasterImage(arr2)
    img = caption_layer(img, "FIRMA DEL TITULAR", max(6, int(9 * scale)),
                        sig["x"], min(h - 12, y_line + 4))

    write_png(img, TEMPLATES / f"{name}.png")
    print(f"wrote {name}.png ({w}x{h})")


if __name__ == "__main__":
    build("extranjero", "EXTRANJERO")
    build("citizen", None)
