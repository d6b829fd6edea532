"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class SizeGuardError(DomainError):
    """Exhaustive enumeration was requested on an instance that is too large."""


class InvariantViolation(AssertionError):
    """A property that the mathematics guarantees was observed to fail.

    Never caught inside the library; the CLI turns it into a non-zero exit.
    """
