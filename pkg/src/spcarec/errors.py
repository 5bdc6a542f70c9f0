"""Exception types shared across the package."""


class IrregularityUndefined(ValueError):
    """The irregularity of a graph is undefined (max degree below the
    algebraic connectivity on the graph or its complement)."""


class Disconnected(ValueError):
    """A graph block required to be connected has algebraic connectivity 0."""


class BucketExhausted(RuntimeError):
    """Rejection sampling failed to hit the requested ratio bucket."""


class DegenerateBaseline(ValueError):
    """The unpenalized solution explains zero variance, so the tuning
    criterion is undefined."""


class ThresholdTooLarge(RuntimeError):
    """Thresholded power iteration collapsed to the zero vector."""


class MatrixParseError(ValueError):
    """A matrix CSV file failed validation; the message carries the
    offending row/column."""
