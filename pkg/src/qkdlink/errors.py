"""Exception hierarchy shared by all qkdlink modules."""


class QkdLinkError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QkdLinkError):
    """A scenario field violates its invariant.

    Carries the offending field name so CLI messages can point at it.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ScenarioParseError(QkdLinkError):
    """A scenario file is malformed (bad JSON, unknown keys, wrong types)."""


class DomainError(QkdLinkError):
    """An operation was called outside its mathematical domain."""


class DegenerateLinkError(QkdLinkError):
    """No detections at all: click or coincidence probability is zero."""


class QuadratureError(QkdLinkError):
    """Adaptive quadrature failed to reach the requested tolerance."""
