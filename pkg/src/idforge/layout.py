"""Declarative ID-card layouts: parsing, validation, builtin templates.

A layout is a JSON document (strict schema: unknown keys are rejected so
files stay bit-exact reproducible) that places every card component on the
template canvas. Coordinates use a top-left origin with y growing downward;
rotation is counterclockwise about the component center.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

from .assets import asset_path
from .errors import InvariantError, ParseError, SchemaError


class ComponentKind(Enum):
    FACE = "face"
    GHOST_FACE = "ghost_face"
    TEXT_FIELD = "text_field"
    SIGNATURE = "signature"
    MRZ = "mrz"
    STATIC_GRAPHIC = "static_graphic"


_TEXT_KINDS = (ComponentKind.TEXT_FIELD, ComponentKind.MRZ)


@dataclass(frozen=True)
class ComponentSpec:
    id: str
    kind: ComponentKind
    x: int
    y: int
    width: int
    height: int
    z_order: int
    rotation_deg: float = 0.0
    opacity: float = 1.0
    color: tuple[int, int, int, int] = (0, 0, 0, 255)
    font_ref: str | None = None
    font_size_px: int | None = None
    field_key: str | None = None


@dataclass(frozen=True)
class LayoutSpec:
    template_id: str
    canvas_width: int
    canvas_height: int
    template_image_ref: str
    components: tuple[ComponentSpec, ...]


# Component keys with defaults may be omitted from layout files.
_REQUIRED_COMPONENT_KEYS = {"id", "kind", "x", "y", "width", "height", "z_order"}
_OPTIONAL_COMPONENT_KEYS = {"rotation_deg", "opacity", "color",
                            "font_ref", "font_size_px", "field_key"}
_TOP_LEVEL_KEYS = {"template_id", "canvas", "template_image", "components"}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaError(message)


def _parse_component(raw: dict, index: int) -> ComponentSpec:
    if not isinstance(raw, dict):
        raise SchemaError(f"components[{index}] must be an object")
    unknown = set(raw) - _REQUIRED_COMPONENT_KEYS - _OPTIONAL_COMPONENT_KEYS
    _require(not unknown, f"components[{index}] has unknown keys: {sorted(unknown)}")
    missing = _REQUIRED_COMPONENT_KEYS - set(raw)
    _require(not missing, f"components[{index}] missing keys: {sorted(missing)}")

    _require(isinstance(raw["id"], str), f"components[{index}].id must be a string")
    cid = raw["id"]
    try:
        kind = ComponentKind(raw["kind"])
    except (ValueError, TypeError):
        raise SchemaError(f"component {cid!r}: unknown kind {raw.get('kind')!r}") from None
    for key in ("x", "y", "width", "height", "z_order"):
        _require(isinstance(raw[key], int) and not isinstance(raw[key], bool),
                 f"component {cid!r}: {key} must be an integer")
    rotation = raw.get("rotation_deg", 0.0)
    _require(isinstance(rotation, (int, float)) and not isinstance(rotation, bool),
             f"component {cid!r}: rotation_deg must be a number")
    opacity = raw.get("opacity", 1.0)
    _require(isinstance(opacity, (int, float)) and not isinstance(opacity, bool),
             f"component {cid!r}: opacity must be a number")
    color = raw.get("color", [0, 0, 0, 255])
    _require(isinstance(color, list) and len(color) == 4
             and all(isinstance(c, int) and not isinstance(c, bool) and 0 <= c <= 255 for c in color),
             f"component {cid!r}: color must be [r, g, b, a] with 8-bit values")
    font_ref = raw.get("font_ref")
    _require(font_ref is None or isinstance(font_ref, str),
             f"component {cid!r}: font_ref must be a string")
    font_size = raw.get("font_size_px")
    _require(font_size is None or (isinstance(font_size, int) and not isinstance(font_size, bool)),
             f"component {cid!r}: font_size_px must be an integer")
    field_key = raw.get("field_key")
    _require(field_key is None or isinstance(field_key, str),
             f"component {cid!r}: field_key must be a string")

    return ComponentSpec(
        id=cid, kind=kind, x=raw["x"], y=raw["y"],
        width=raw["width"], height=raw["height"], z_order=raw["z_order"],
        rotation_deg=float(rotation), opacity=float(opacity),
        color=tuple(color), font_ref=font_ref, font_size_px=font_size,
        field_key=field_key,
    )


def parse_layout(document: bytes | str) -> LayoutSpec:
    """Parse and validate a layout document.

    Raises ParseError for malformed JSON, SchemaError for shape problems,
    InvariantError (naming the component) for semantic violations.
    Components are returned sorted by z_order.
    """
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"layout is not valid UTF-8: {exc}") from exc
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"layout is not valid JSON: {exc}") from exc

    _require(isinstance(data, dict), "layout document must be a JSON object")
    unknown = set(data) - _TOP_LEVEL_KEYS
    _require(not unknown, f"unknown top-level keys: {sorted(unknown)}")
    missing = _TOP_LEVEL_KEYS - set(data)
    _require(not missing, f"missing top-level keys: {sorted(missing)}")
    _require(isinstance(data["template_id"], str), "template_id must be a string")
    canvas = data["canvas"]
    _require(isinstance(canvas, dict) and set(canvas) == {"width", "height"},
             "canvas must be an object with width and height")
    for key in ("width", "height"):
        _require(isinstance(canvas[key], int) and not isinstance(canvas[key], bool),
                 f"canvas.{key} must be an integer")
    _require(isinstance(data["template_image"], str), "template_image must be a string")
    _require(isinstance(data["components"], list), "components must be a list")

    components = [_parse_component(raw, i) for i, raw in enumerate(data["components"])]
    z_orders = [c.z_order for c in components]
    if len(set(z_orders)) != len(z_orders):
        dupes = sorted({z for z in z_orders if z_orders.count(z) > 1})
        raise InvariantError(f"z_order not total: duplicate values {dupes}")
    components.sort(key=lambda c: c.z_order)

    spec = LayoutSpec(
        template_id=data["template_id"],
        canvas_width=canvas["width"],
        canvas_height=canvas["height"],
        template_image_ref=data["template_image"],
        components=tuple(components),
    )
    problems = validate_layout(spec)
    if problems:
        raise InvariantError("; ".join(problems))
    return spec


def serialize_layout(spec: LayoutSpec) -> str:
    """Inverse of parse_layout; parse(serialize(s)) == s field-by-field."""
    doc = {
        "template_id": spec.template_id,
        "canvas": {"width": spec.canvas_width, "height": spec.canvas_height},
        "template_image": spec.template_image_ref,
        "components": [
            {
                "id": c.id,
                "kind": c.kind.value,
                "x": c.x, "y": c.y,
                "width": c.width, "height": c.height,
                "z_order": c.z_order,
                "rotation_deg": c.rotation_deg,
                "opacity": c.opacity,
                "color": list(c.color),
                **({"font_ref": c.font_ref} if c.font_ref is not None else {}),
                **({"font_size_px": c.font_size_px} if c.font_size_px is not None else {}),
                **({"field_key": c.field_key} if c.field_key is not None else {}),
            }
            for c in spec.components
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def validate_layout(spec: LayoutSpec) -> list[str]:
    """Every invariant violation as a human-readable string; [] when valid."""
    problems = []
    if spec.canvas_width <= 0 or spec.canvas_height <= 0:
        problems.append(f"canvas not positive: {spec.canvas_width}x{spec.canvas_height}")

    seen_ids: set[str] = set()
    for c in spec.components:
        if c.id in seen_ids:
            problems.append(f"duplicate id: {c.id}")
        seen_ids.add(c.id)
        if c.width <= 0 or c.height <= 0:
            problems.append(f"size not positive: {c.id}")
        if not (0.0 <= c.opacity <= 1.0):
            problems.append(f"opacity out of range: {c.id}")
        if (c.x < 0 or c.y < 0
                or c.x + c.width > spec.canvas_width
                or c.y + c.height > spec.canvas_height):
            problems.append(f"out of canvas: {c.id}")
        if c.kind in _TEXT_KINDS:
            if c.font_ref is None or c.font_size_px is None or c.field_key is None:
                problems.append(f"text component missing font_ref/font_size_px/field_key: {c.id}")
            elif c.font_size_px <= 0:
                problems.append(f"font_size_px not positive: {c.id}")

    z_orders = [c.z_order for c in spec.components]
    if len(set(z_orders)) != len(z_orders):
        problems.append("z_order not total: duplicate values")
    elif any(a.z_order >= b.z_order for a, b in zip(spec.components, spec.components[1:])):
        problems.append("components not ordered by z_order")
    return problems


_BUILTIN_FILES = ("extranjero", "citizen")


def builtin_templates() -> list[LayoutSpec]:
    """The two shipped card layouts: "extranjero" (742x466) and "citizen"
    (600x377).

    Component placements are plausible reconstructions, not official values;
    asset references are resolved to the installed package files.
    """
    specs = []
    for name in _BUILTIN_FILES:
        raw = asset_path(f"templates/{name}.json").read_bytes()
        spec = parse_layout(raw)
        spec = replace(
            spec,
            template_image_ref=str(asset_path(f"templates/{name}.png")),
            components=tuple(
                replace(c, font_ref=str(asset_path(c.font_ref[len("pkg:"):])))
                if c.font_ref is not None and c.font_ref.startswith("pkg:") else c
                for c in spec.components
            ),
        )
        specs.append(spec)
    return specs


def load_layout(ref: str) -> LayoutSpec:
    """Load a layout by builtin name ("citizen"/"extranjero") or file path."""
    if ref in _BUILTIN_FILES:
        return builtin_templates()[_BUILTIN_FILES.index(ref)]
    try:
        raw = open(ref, "rb").read()
    except OSError as exc:
        raise ParseError(f"cannot read layout {ref}: {exc}") from exc
    return parse_layout(raw)


def layout_field_keys(spec: LayoutSpec) -> set[str]:
    return {c.field_key for c in spec.components if c.field_key is not None}


__all__ = [
    "ComponentKind",
    "ComponentSpec",
    "LayoutSpec",
    "builtin_templates",
    "layout_field_keys",
    "load_layout",
    "parse_layout",
    "serialize_layout",
    "validate_layout",
]
