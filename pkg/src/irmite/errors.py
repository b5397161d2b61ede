"""Exception types raised across the package."""


class IrmIteError(Exception):
    """Base class for all package-specific errors."""


class InvalidArg(IrmIteError, ValueError):
    """A caller-supplied argument violates a documented precondition."""


class SingularInput(IrmIteError):
    """Matrix is rank-deficient beyond the retry budget."""


class NotPSD(IrmIteError):
    """Matrix has an eigenvalue below the negative jitter tolerance."""


class NotPD(IrmIteError):
    """Cholesky factorization of a supposedly positive-definite matrix failed."""


class DimensionMismatch(IrmIteError, ValueError):
    """Array shapes are inconsistent with each other."""


class EmptyInput(IrmIteError, ValueError):
    """An operation received zero rows where at least one is required."""


class LengthMismatch(IrmIteError, ValueError):
    """Paired vectors have different lengths."""


class EmptyDomainGroup(IrmIteError):
    """A (domain, treatment-group) cell is empty; the caller should redraw the split."""


class MissingOracle(IrmIteError):
    """Dataset lacks the ground-truth columns required for evaluation."""


class NonFinite(IrmIteError):
    """Loss or gradient became non-finite during optimization (learning rate too large)."""


class SchemaError(IrmIteError, ValueError):
    """A results CSV does not conform to the expected schema."""
