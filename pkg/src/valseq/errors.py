"""Exception types shared across the package."""


class ValseqError(Exception):
    """Base class for all package-specific errors."""


class DomainError(ValseqError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class InsufficientPrecision(ValseqError):
    """A digit-prefix theta was queried beyond its last known digit."""


class SequenceTooShort(ValseqError):
    """The stored value sequence does not reach far enough to locate n."""


class NoConductor(ValseqError):
    """The generators have gcd > 1, so no conductor exists."""


class NotStabilized(ValseqError):
    """The dimension data never settles at the residue degree within the window."""


class MalformedCertificate(ValseqError):
    """A refutation certificate is structurally invalid."""
