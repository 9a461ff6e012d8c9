"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ContractViolation(ValueError):
    """A precondition that callers must guarantee does not hold."""


class SingularSeriesError(ArithmeticError):
    """A denominator parameter of a terminating series hits zero before the
    series terminates."""


class UnsupportedCombination(ValueError):
    """The requested (family, convolution type) pair does not exist."""


class SizeCapExceeded(ValueError):
    """A brute-force oracle was asked for a lattice larger than its cap."""
