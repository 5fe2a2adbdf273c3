"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line driver:
2 for bad input/usage, 3 for numerical guard violations, 4 for I/O and
file-format problems.
"""


class DetentError(Exception):
    exit_code = 3


class UsageError(DetentError, ValueError):
    exit_code = 2


class NumericalError(DetentError, ArithmeticError):
    exit_code = 3


class FormatError(DetentError, OSError):
    """Malformed graph or kernel file; ``offset`` is a byte offset."""

    exit_code = 4

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


# graph
class DegreeBoundExceeded(UsageError):
    pass


class SelfLoop(UsageError):
    pass


class NonpositiveWeight(UsageError):
    pass


class BadParams(UsageError):
    pass


class InvalidVertex(UsageError):
    pass


class EmptyGraph(UsageError):
    pass


class Disconnected(UsageError):
    pass


# kernels
class NotSymmetric(NumericalError):
    pass


class NotContraction(NumericalError):
    pass


class EmptyLabelSet(UsageError):
    pass


# conditioning / sampling
class PivotTooSmall(NumericalError):
    pass


class NotPermitted(NumericalError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class KernelDrift(NumericalError):
    pass


class GroundSetTooLarge(NumericalError):
    pass


# entropy / bsstats
class InvalidRadius(UsageError):
    pass


class BallTooLarge(NumericalError):
    pass


class BadFamily(UsageError):
    pass
