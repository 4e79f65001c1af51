"""Exception hierarchy shared by all phasewalk modules."""


class PhaseWalkError(Exception):
    """Base class for all errors raised by phasewalk."""


class ValidationError(PhaseWalkError, ValueError):
    """Invalid input: malformed dataset, bad parameter, violated precondition."""


class DatasetError(ValidationError):
    """A dataset on disk (or in memory) does not satisfy the network invariants."""


class NumericalError(PhaseWalkError, ArithmeticError):
    """A numerical stage failed: non-finite values, degenerate spectrum, divergence."""
