"""Feature-set loading and the on-disk feature formats.

Binary format: 16-byte header (magic "FSET", u32 n, u32 d, u32 reserved,
little-endian) followed by n*d little-endian float32 values, row-major.
Small sets may also be stored as headered CSV (one column per dimension).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InvariantError, NonFiniteError, ParseError

MAGIC = b"FSET"
_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """n x d float32 embedding matrix; n >= 2 so covariance is defined."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 2:
            raise InvariantError(f"features must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise InvariantError(f"need n >= 2 rows for covariance, got {arr.shape[0]}")
        if arr.shape[1] < 1:
            raise InvariantError("need d >= 1 dimensions")
        bad = ~np.isfinite(arr)
        if bad.any():
            row = int(np.nonzero(bad.any(axis=1))[0][0])
            raise NonFiniteError(row)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def save_features(fs: FeatureSet, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, fs.n, fs.d, 0))
        fh.write(fs.values.astype("<f4").tobytes())


def _load_binary(data: bytes, path) -> FeatureSet:
    if len(data) < _HEADER.size:
        raise ParseError(f"{path}: truncated feature header")
    magic, n, d, _reserved = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 4 * n * d
    if len(data) != expected:
        raise ParseError(f"{path}: expected {expected} bytes for {n}x{d}, got {len(data)}")
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(n, d)
    return FeatureSet(values)


def _load_csv(text: str, path) -> FeatureSet:
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 2:
        raise ParseError(f"{path}: CSV needs a header and at least two rows")
    d = len(lines[0].split(","))
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != d:
            raise ParseError(f"{path}: line {lineno} has {len(cells)} columns, expected {d}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    return FeatureSet(np.asarray(rows, dtype=np.float32))


def load_features(path: str | Path) -> FeatureSet:
    """Load a binary "FSET" file, falling back to headered CSV."""
    data = Path(path).read_bytes()
    if data[:4] == MAGIC:
        return _load_binary(data, path)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: neither FSET binary nor UTF-8 CSV") from exc
    return _load_csv(text, path)


def save_features_csv(fs: FeatureSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"d{i}" for i in range(fs.d)) + "\n")
        for row in fs.values:
            fh.write(",".join(f"{v:.9g}" for v in row) + "\n")
