"""Exception types shared across the package.

The CLI maps these onto distinct exit codes (schema/domain problems,
numerical non-convergence, failed verifications), so library code should
raise the most specific one that applies.
"""


class PolydetError(Exception):
    """Base class for all package errors."""


class SchemaError(PolydetError):
    """Invalid configuration, pack file, or argument structure."""


class DomainError(PolydetError):
    """Input outside the mathematical domain of an operation."""


class ConvergenceError(PolydetError):
    """A quadrature, series, or fit failed to reach its tolerance."""


class VerificationError(PolydetError):
    """A numerical identity check exceeded its tolerance."""
