"""Exception types raised by axirot.

Each error carries the CLI exit code it maps to, so the command-line layer
never needs its own lookup table.
"""


class AxirotError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 2


class InvalidInput(AxirotError, ValueError):
    """A parameter or argument violates its documented domain."""


class NonPositiveRadius(InvalidInput):
    pass


class InvalidProbability(InvalidInput):
    pass


class EmptyInput(InvalidInput):
    pass


class InsufficientPoints(InvalidInput):
    pass


class BehindCamera(InvalidInput):
    """A scene point has z <= 0 and cannot be projected."""


class Malformed(InvalidInput):
    """A correspondence or config file contains a bad row."""

    def __init__(self, line_number, reason):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class EmptyFile(InvalidInput):
    pass


class DegenerateCorrespondence(AxirotError, ArithmeticError):
    """Both terms of the angle equation vanish, so the angle is 0/0."""

    exit_code = 5


class UndefinedDistance(AxirotError, ArithmeticError):
    """The Sampson distance denominator is zero (e.g. the zero essential matrix)."""

    exit_code = 5


class NoConsensus(AxirotError, RuntimeError):
    """No RANSAC hypothesis reached the minimum inlier fraction."""

    exit_code = 3


class NoPeak(AxirotError, RuntimeError):
    """The angle histogram has no bin above the minimum peak count."""

    exit_code = 4
