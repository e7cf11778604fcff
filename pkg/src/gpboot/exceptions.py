"""Exception and warning classes raised across gpboot."""


class GPBootError(ValueError):
    """Base class for all input/contract errors raised by gpboot."""


class NotSymmetric(GPBootError):
    pass


class NotPSD(GPBootError):
    pass


class RankExceeded(GPBootError):
    pass


class EmptyNet(GPBootError):
    pass


class TooFewSamples(GPBootError):
    pass


class TooFewPoints(GPBootError):
    pass


class DimensionMismatch(GPBootError):
    pass


class AlphaOutOfRange(GPBootError):
    pass


class NonpositiveVariance(GPBootError):
    pass


class UnknownGenerator(GPBootError):
    pass


class ZeroMatrix(GPBootError):
    pass


class SingularSystem(GPBootError):
    pass


class NoConvergence(RuntimeError):
    pass


class ConfigInvalid(GPBootError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"invalid config field '{field}': {message}")


class ParseError(GPBootError):
    def __init__(self, row, col, message):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, column {col}: {message}")


class RaggedRows(GPBootError):
    def __init__(self, row, expected, got):
        self.row = row
        super().__init__(f"row {row} has {got} fields, expected {expected}")


class DegenerateCovariance(UserWarning):
    """The covariance estimate is identically zero; all bootstrap draws are 0."""
