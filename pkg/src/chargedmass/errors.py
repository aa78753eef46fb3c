"""Exception types raised by the toolkit."""


class ChargedMassError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ChargedMassError, ValueError):
    """A point lies outside the domain of a field (or too close to its edge)."""


class EvaluationError(ChargedMassError, ArithmeticError):
    """A field evaluation produced a non-finite value."""


class GeometryError(ChargedMassError, ValueError):
    """The metric is singular or badly conditioned at a point."""


class ExpressionSyntaxError(ChargedMassError, ValueError):
    """Malformed expression text; ``offset`` is the 0-based character position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ConfigError(ChargedMassError, ValueError):
    """Invalid run configuration."""
