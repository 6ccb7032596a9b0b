"""Exception hierarchy shared by all histq modules."""


class HistqError(Exception):
    """Base class for every error raised by histq."""


class NotHermitian(HistqError):
    pass


class NotPSD(HistqError):
    pass


class InvalidFactor(HistqError):
    pass


class SpecMismatch(HistqError):
    pass


class NotAPartition(HistqError):
    def __init__(self, message, slot=None):
        super().__init__(message)
        self.slot = slot


class DimensionCap(HistqError):
    def __init__(self, dim, limit):
        super().__init__(
            f"doubled-space dimension {dim} exceeds the limit of {limit} "
            f"(set HISTQ_MAX_DIM to override)"
        )
        self.dim = dim
        self.limit = limit


class NotSwapHermitian(HistqError):
    pass


class BadGrouping(HistqError):
    pass


class BadIndex(HistqError):
    pass


class ValidationError(HistqError):
    pass


class ParseError(HistqError):
    pass
