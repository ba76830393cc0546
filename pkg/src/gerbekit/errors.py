"""Exception hierarchy.

The CLI maps these onto exit codes: parse problems exit 2, validation and
reference problems exit 3, mathematical obstructions exit 1.
"""


class GerbekitError(Exception):
    """Base class for every error raised by the package."""


class ParseError(GerbekitError):
    """A description file is not valid JSON or does not match the schema."""


class ValidationError(GerbekitError, ValueError):
    """An input object violates its structural invariants."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class ReferenceError_(ValidationError):
    """A named entity refers to a name that does not exist."""


class TruncationError(GerbekitError, ValueError):
    """A computation needs simplicial levels beyond the stored truncation."""


class NotACocycleError(ValidationError):
    """An operation that requires a cocycle was handed something else."""


class MathematicalObstruction(GerbekitError):
    """A well-formed request that has no solution (exit code 1)."""


class NonIntegralClassError(MathematicalObstruction):
    pass


class PrequantizationObstruction(MathematicalObstruction):
    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class ExtensionError(MathematicalObstruction):
    """The candidate 2-cochain does not give an associative extension."""

    def __init__(self, message, associator=None):
        super().__init__(message)
        self.associator = associator


class NotFlatError(MathematicalObstruction):
    pass
