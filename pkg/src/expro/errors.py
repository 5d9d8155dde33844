"""Exception types shared across the package."""


class ExproError(Exception):
    """Base class for all expro errors."""


class InvalidRankError(ExproError):
    pass


class NotReducedError(ExproError):
    pass


class InvalidOrderError(ExproError):
    pass


class ZeroDivisorError(ExproError):
    pass


class PoleAtPointError(ExproError):
    pass


class NotWeightZeroError(ExproError):
    pass


class TruncationOverflowError(ExproError):
    pass


class NotCentralError(ExproError):
    pass


class DegenerateCenterError(ExproError):
    pass


class DecompositionError(ExproError):
    pass


class DegenerateFormError(ExproError):
    pass


class InvalidTError(ExproError):
    pass


class ParseError(ExproError):
    pass
