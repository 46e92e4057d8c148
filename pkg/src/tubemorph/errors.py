"""
Exception hierarchy for tubemorph.

Every error derives from ValueError so that pydantic validators can raise them
and the CLI can map them to the input-error exit code.
"""


class TubemorphError(ValueError):
    """Base class for input and contract errors."""


class FormatError(TubemorphError):
    """Malformed file contents. `field` names the offending header field or region."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class SchemaError(TubemorphError):
    """Graph or windowed-graph JSON that violates the schema."""


class ShapeMismatchError(TubemorphError):
    """Two rasters (or a raster and a graph) disagree on dimensions."""


class BoundsError(TubemorphError):
    """A coordinate lies outside the raster it indexes."""


class PreconditionError(TubemorphError):
    """An operation was called outside its contract (e.g. non-thin mask)."""
