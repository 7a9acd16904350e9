"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keep the hierarchy flat
and the categories disjoint: bad caller input, bad file content, and
numerical breakdown are different failures.
"""


class SketchsolveError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SketchsolveError, ValueError):
    """A caller-supplied argument violates a precondition."""


class FormatError(SketchsolveError):
    """A data file (CSV or binary system file) is malformed."""


class RankDeficientError(SketchsolveError):
    """The matrix is numerically rank-deficient for the requested diagnostic."""


class ZeroRowError(SketchsolveError):
    """A projection target row has (near-)zero norm."""
