"""Error hierarchy shared across the pipeline.

SchemaError covers malformed input files and bad field values (CLI exit 3);
InvariantError covers violations of documented data invariants discovered in
otherwise well-formed data (CLI exit 4).
"""


class NewsfilterError(Exception):
    """Base class for all package errors."""


class SchemaError(NewsfilterError):
    """Input does not match the documented file schema."""


class InvariantError(NewsfilterError):
    """A validated data invariant does not hold."""
