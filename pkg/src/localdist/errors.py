"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """A table, strategy, or weight vector does not match the declared scenario dimensions."""


class SchemaError(ValueError):
    """A JSON document does not follow the behavior or report schema."""


class EnumerationCapExceeded(RuntimeError):
    """An exact enumeration was requested for a scenario larger than the configured cap."""
