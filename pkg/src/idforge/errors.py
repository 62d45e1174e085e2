"""Exception hierarchy shared by all idforge modules."""

from __future__ import annotations


class IdforgeError(Exception):
    """Base class for all idforge errors."""


class ParseError(IdforgeError):
    """A document (JSON layout, CSV, feature file, ...) is not well formed."""


class SchemaError(IdforgeError):
    """A document parsed but has missing/extra fields or wrong types."""


class InvariantError(IdforgeError):
    """A parsed or constructed value violates a type invariant."""


class RangeError(IdforgeError):
    """A numeric argument is outside its documented range."""


class MismatchError(IdforgeError):
    """Paired values that must agree (e.g. number and check digit) do not."""


class AlphabetError(IdforgeError):
    """A string contains characters outside its allowed alphabet."""


class EncodingError(IdforgeError):
    """A value cannot be encoded into the target representation."""


class FontError(IdforgeError):
    """A font file is missing or cannot be parsed."""


class GlyphError(IdforgeError):
    """A character has no glyph in the font. Carries the missing characters."""

    def __init__(self, missing: tuple[str, ...]):
        super().__init__(f"missing glyphs for: {', '.join(repr(c) for c in missing)}")
        self.missing = missing


class AssetError(IdforgeError):
    """An input asset (image, template) is missing or undecodable."""


class FieldError(IdforgeError):
    """A layout component references a field the persona cannot provide."""


class EmptyClassError(IdforgeError):
    """A metric was requested for a class with no records."""


class DimensionError(IdforgeError):
    """Operands have incompatible dimensions."""


class NotPsdError(IdforgeError):
    """A matrix expected to be positive semi-definite is not."""


class NonFiniteError(IdforgeError):
    """A value that must be finite is NaN or infinite. Carries the row index."""

    def __init__(self, row: int, message: str | None = None):
        super().__init__(message or f"non-finite value in row {row}")
        self.row = row


class ConvergenceError(IdforgeError):
    """An iterative numeric procedure failed to converge."""


class Exhausted(IdforgeError):
    """A supply (face pool, source rounds) ran out before the request was met.

    Carries the items accepted before exhaustion.
    """

    def __init__(self, accepted: list[str], message: str | None = None):
        super().__init__(message or f"supply exhausted after {len(accepted)} accepted")
        self.accepted = accepted
