"""Access to data files shipped with the package (fonts, builtin templates).

Asset references in layout files may use the "pkg:" prefix (e.g.
"pkg:fonts/DejaVuSans.ttf"); :func:`resolve_ref` turns them into real paths.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .errors import AssetError

PKG_PREFIX = "pkg:"


def asset_path(relative: str) -> Path:
    root = resources.files("idforge") / "assets"
    candidate = Path(str(root / relative))
    if not candidate.is_file():
        raise AssetError(f"packaged asset not found: {relative}")
    return candidate


def resolve_ref(ref: str, base_dir: str | Path | None = None) -> Path:
    """Resolve a layout asset reference to a filesystem path.

    "pkg:..." resolves inside the installed package; absolute paths pass
    through; relative paths resolve against `base_dir` (or the cwd).
    """
    if ref.startswith(PKG_PREFIX):
        return asset_path(ref[len(PKG_PREFIX):])
    path = Path(ref)
    if path.is_absolute() or base_dir is None:
        return path
    return Path(base_dir) / path
