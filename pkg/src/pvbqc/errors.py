"""Exception types raised across the package."""


class PvbqcError(ValueError):
    """Base class for all library errors."""


class NotTwoColorable(PvbqcError):
    pass


class InvalidEdge(PvbqcError):
    pass


class InvalidVertex(PvbqcError):
    pass


class InvalidParams(PvbqcError):
    pass


class TooLarge(PvbqcError):
    """Dense oracle requested beyond the qubit cap."""


class DomainMismatch(PvbqcError):
    pass


class OddBatch(PvbqcError):
    pass


class ThresholdOutOfRange(PvbqcError):
    pass


class TooSmallN(PvbqcError):
    pass


class ThresholdExceeded(PvbqcError):
    """The observed failure count is above the acceptance threshold, so no certificate exists."""


class LambdaOutOfRange(PvbqcError):
    pass


class WrongBatchSize(PvbqcError):
    pass


class NoDispute(PvbqcError):
    pass


class InvalidConfig(PvbqcError):
    pass


class Infeasible(PvbqcError):
    pass


class PositionMismatch(PvbqcError):
    pass
