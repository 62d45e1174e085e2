"""Document assembly: template + face + text + signature -> finished card.

Per-component processing follows the post-processing chains
(face: matting -> grayscale -> resize -> opacity; signature: threshold
matting -> resize -> rotate), then source-over compositing in z order.
Everything derives from the DocumentSpec, so identical specs give
bit-identical images and metadata.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .assets import resolve_ref
from .errors import AssetError, Exhausted, FieldError, InvariantError, ParseError, SchemaError
from .imaging import (
    PixelFormat,
    RasterImage,
    alpha_channel,
    apply_opacity,
    composite,
    crop,
    gray_to_rgba,
    png_bytes,
    read_png,
    remove_background_threshold,
    remove_near_white,
    render_text,
    resize,
    rotate_ccw,
    to_grayscale,
)
from .layout import ComponentKind, ComponentSpec, LayoutSpec
from .persona import Persona, display_fields, format_date_display, generate_persona, mix_seed, persona_json_dict

CLASS_LABELS = ("bonafide", "simulated_bonafide", "print", "screen", "pvc")
SPLITS = ("train", "val", "test", "none")

# Deterministic stand-in for learned matting on face sources.
NEAR_WHITE_TOLERANCE = 16
SIGNATURE_BG_THRESHOLD = 200


@dataclass(frozen=True)
class DocumentSpec:
    layout: LayoutSpec
    persona: Persona
    face: RasterImage
    signature: RasterImage
    seed: int


@dataclass(frozen=True)
class GeneratedDocument:
    image: RasterImage
    metadata: dict


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    split: str = "none"
    seed: int | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        paths = [e.path for e in self.entries]
        if len(set(paths)) != len(paths):
            dupes = sorted({p for p in paths if paths.count(p) > 1})
            raise InvariantError(f"duplicate manifest paths: {dupes}")
        for e in self.entries:
            if e.label not in CLASS_LABELS:
                raise SchemaError(f"unknown class label {e.label!r} for {e.path}")
            if e.split not in SPLITS:
                raise SchemaError(f"unknown split {e.split!r} for {e.path}")


def component_render_rect(comp: ComponentSpec) -> tuple[int, int, int, int]:
    """Placement rectangle after rotation expansion, center-preserving.

    For rotation 0 this is the declared (x, y, width, height); otherwise the
    rotated bounding box centered on the declared rectangle.
    """
    if comp.rotation_deg == 0.0:
        return comp.x, comp.y, comp.width, comp.height
    theta = math.radians(comp.rotation_deg)
    c, s = abs(math.cos(theta)), abs(math.sin(theta))
    rw = max(1, math.ceil(comp.width * c + comp.height * s - 1e-9))
    rh = max(1, math.ceil(comp.width * s + comp.height * c - 1e-9))
    px = comp.x + (comp.width - rw) // 2
    py = comp.y + (comp.height - rh) // 2
    return px, py, rw, rh


def _prepare_face(face: RasterImage, comp: ComponentSpec) -> RasterImage:
    masked = remove_near_white(face, NEAR_WHITE_TOLERANCE)
    gray = gray_to_rgba(to_grayscale(masked), alpha_channel(masked))
    sized = resize(gray, comp.width, comp.height)
    return apply_opacity(sized, comp.opacity)


def _prepare_signature(signature: RasterImage, comp: ComponentSpec) -> RasterImage:
    gray = to_grayscale(signature)
    masked = remove_background_threshold(gray, SIGNATURE_BG_THRESHOLD)
    sized = resize(masked, comp.width, comp.height)
    if comp.rotation_deg != 0.0:
        sized = rotate_ccw(sized, comp.rotation_deg)
    if comp.opacity != 1.0:
        sized = apply_opacity(sized, comp.opacity)
    return sized


def _prepare_static(comp: ComponentSpec) -> RasterImage:
    block = RasterImage.new_rgba(comp.width, comp.height, comp.color)
    if comp.opacity != 1.0:
        block = apply_opacity(block, comp.opacity)
    return block


def compose_document(spec: DocumentSpec,
                     date_format: Callable = format_date_display) -> GeneratedDocument:
    """Render one document and its ground-truth sidecar metadata.

    Text rasters larger than their declared box are cropped to it so that
    no component ever paints outside its placement rectangle.
    """
    layout = spec.layout
    fields = display_fields(spec.persona, date_format)
    for comp in layout.components:
        if comp.field_key is not None and comp.field_key not in fields:
            raise FieldError(f"component {comp.id!r}: unresolvable field_key {comp.field_key!r}")
    if spec.face.format is not PixelFormat.RGBA8:
        raise AssetError("face image must be RGBA8")

    template = read_png(resolve_ref(layout.template_image_ref))
    if template.format is PixelFormat.GRAY8:
        template = gray_to_rgba(template)
    if (template.width, template.height) != (layout.canvas_width, layout.canvas_height):
        raise AssetError(
            f"template image is {template.width}x{template.height}, layout canvas is "
            f"{layout.canvas_width}x{layout.canvas_height}")

    canvas = template
    rendered_fields: dict[str, str] = {}
    placements = []
    for comp in layout.components:  # already sorted by z_order
        rotated_rect = component_render_rect(comp)
        if comp.kind in (ComponentKind.FACE, ComponentKind.GHOST_FACE):
            layer = _prepare_face(spec.face, comp)
            if comp.rotation_deg != 0.0:
                layer = rotate_ccw(layer, comp.rotation_deg)
            px, py = rotated_rect[0], rotated_rect[1]
        elif comp.kind is ComponentKind.SIGNATURE:
            layer = _prepare_signature(spec.signature, comp)
            px, py = rotated_rect[0], rotated_rect[1]
        elif comp.kind in (ComponentKind.TEXT_FIELD, ComponentKind.MRZ):
            text = fields[comp.field_key]
            rendered_fields[comp.field_key] = text
            raster = render_text(text, resolve_ref(comp.font_ref), comp.font_size_px,
                                 comp.color)
            layer = raster.image
            if layer.width > comp.width or layer.height > comp.height:
                layer = crop(layer, 0, 0,
                             min(layer.width, comp.width), min(layer.height, comp.height))
            if comp.opacity != 1.0:
                layer = apply_opacity(layer, comp.opacity)
            if comp.rotation_deg != 0.0:
                layer = rotate_ccw(layer, comp.rotation_deg)
            px, py = comp.x, comp.y
        elif comp.kind is ComponentKind.STATIC_GRAPHIC:
            layer = _prepare_static(comp)
            if comp.rotation_deg != 0.0:
                layer = rotate_ccw(layer, comp.rotation_deg)
            px, py = rotated_rect[0], rotated_rect[1]
        else:  # pragma: no cover
            raise AssetError(f"unhandled component kind {comp.kind}")
        canvas = composite(canvas, layer, px, py)
        placements.append({
            "id": comp.id,
            "kind": comp.kind.value,
            "x": comp.x, "y": comp.y,
            "width": comp.width, "height": comp.height,
            "rotation_deg": comp.rotation_deg,
            "opacity": comp.opacity,
            "z_order": comp.z_order,
            "render_rect": list(rotated_rect),
        })

    metadata = {
        "tool": "idforge",
        "version": __version__,
        "template_id": layout.template_id,
        "canvas": [layout.canvas_width, layout.canvas_height],
        "seed": spec.seed,
        "persona": persona_json_dict(spec.persona, date_format),
        "rendered_fields": rendered_fields,
        "placements": placements,
        "label": "simulated_bonafide",
    }
    return GeneratedDocument(canvas, metadata)


def load_image_pool(directory: str | Path, to_rgba: bool) -> list[tuple[str, RasterImage]]:
    files = [f for f in sorted(Path(directory).iterdir())
             if f.suffix.lower() in (".png", ".jpg", ".jpeg")]
    pool = []
    for f in files:
        img = read_png(f)
        if to_rgba and img.format is PixelFormat.GRAY8:
            img = gray_to_rgba(img)
        pool.append((str(f), img))
    return pool


def _profile_for_layout(layout: LayoutSpec) -> str:
    return "extranjero" if "extranjero" in layout.template_id.lower() else "citizen"


def generate_batch(master_seed: int, n: int, layout: LayoutSpec,
                   faces: Sequence[tuple[str, RasterImage]],
                   signatures: Sequence[tuple[str, RasterImage]],
                   out_dir: str | Path, jobs: int = 1) -> DatasetManifest:
    """Write n documents + sidecars under out_dir and return their manifest.

    Item i depends only on mix_seed(master_seed, i), so output is identical
    for any worker count. Asset pools are indexed deterministically per item.
    """
    if n < 0:
        raise InvariantError("n must be >= 0")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if n == 0:
        return DatasetManifest(())
    if not faces:
        raise Exhausted([], "face pool is empty")
    if not signatures:
        raise Exhausted([], "signature pool is empty")

    profile = _profile_for_layout(layout)

    def build(i: int) -> ManifestEntry:
        item_seed = mix_seed(master_seed, i)
        persona = generate_persona(mix_seed(item_seed, 1), profile)
        face_id, face = faces[mix_seed(item_seed, 2) % len(faces)]
        sig_id, signature = signatures[mix_seed(item_seed, 3) % len(signatures)]
        if face.format is PixelFormat.GRAY8:
            face = gray_to_rgba(face)
        doc = compose_document(DocumentSpec(layout, persona, face, signature, item_seed))
        doc.metadata["source_assets"] = {"face": face_id, "signature": sig_id}
        name = f"doc_{i:05d}"
        (out / f"{name}.png").write_bytes(png_bytes(doc.image))
        (out / f"{name}.meta.json").write_text(
            json.dumps(doc.metadata, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8")
        return ManifestEntry(path=f"{name}.png", label="simulated_bonafide",
                             split="none", seed=item_seed)

    if jobs <= 1:
        entries = [build(i) for i in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(build, range(n)))
    manifest = DatasetManifest(tuple(entries))
    write_manifest(manifest, out / "manifest.jsonl")
    return manifest


def split_assign(manifest: DatasetManifest, fractions: tuple[float, float, float],
                 seed: int) -> DatasetManifest:
    """Assign train/val/test splits by seeded shuffle + contiguous slicing.

    Counts are floor(n * fraction) per split; every remaining entry goes to
    train. Entry order is preserved; only the split labels change.
    """
    f_train, f_val, f_test = fractions
    if min(fractions) < 0 or sum(fractions) > 1.0 + 1e-9:
        raise InvariantError(f"fractions must be non-negative and sum <= 1: {fractions}")
    n = len(manifest.entries)
    n_val = math.floor(n * f_val)
    n_test = math.floor(n * f_test)
    n_train = n - n_val - n_test

    order = list(range(n))
    random.Random(seed).shuffle(order)
    split_of = {}
    for rank, idx in enumerate(order):
        if rank < n_train:
            split_of[idx] = "train"
        elif rank < n_train + n_val:
            split_of[idx] = "val"
        else:
            split_of[idx] = "test"
    return DatasetManifest(tuple(
        replace(e, split=split_of[i]) for i, e in enumerate(manifest.entries)))


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """JSON lines, one entry per row, keys sorted for reproducible bytes."""
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            fh.write(json.dumps(
                {"path": e.path, "label": e.label, "split": e.split, "seed": e.seed},
                sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> DatasetManifest:
    entries = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: not valid JSON: {exc}") from exc
        if not isinstance(raw, dict) or set(raw) != {"path", "label", "split", "seed"}:
            raise SchemaError(f"line {lineno}: expected keys path/label/split/seed")
        if not isinstance(raw["path"], str) or not isinstance(raw["label"], str):
            raise SchemaError(f"line {lineno}: path and label must be strings")
        if raw["seed"] is not None and not isinstance(raw["seed"], int):
            raise SchemaError(f"line {lineno}: seed must be an integer or null")
        entries.append(ManifestEntry(raw["path"], raw["label"], raw["split"], raw["seed"]))
    return DatasetManifest(tuple(entries))
