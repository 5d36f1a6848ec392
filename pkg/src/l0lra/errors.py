"""Exception types shared across the package.

Each class maps to a distinct CLI exit code (see ``l0lra.cli``).
"""


class L0LRAError(Exception):
    """Base class for all package errors."""


class DimensionError(L0LRAError, ValueError):
    """Shapes or vector lengths do not line up."""


class ParameterError(L0LRAError, ValueError):
    """An argument violates a documented precondition."""


class ParseError(L0LRAError, ValueError):
    """Malformed instance or witness text."""


class ScaleError(L0LRAError):
    """The instance exceeds a guard meant to keep exhaustive search tractable."""


class BudgetExhausted(L0LRAError):
    """A search ran out of its enumeration budget before finishing."""


class CertificateError(L0LRAError):
    """A claimed certificate (cover, witness) does not check out."""


class IdentifiedNo(L0LRAError):
    """The reduction found that the Set Cover instance has no exact cover.

    Raised when A w = -1 has no rational solution, which rules out any
    exact cover directly.
    """
