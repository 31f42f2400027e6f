"""Exception types raised by momentcrit."""


class MomentCritError(Exception):
    """Base class for all library errors."""


class CutoffError(MomentCritError, ValueError):
    """A requested state or occupation does not fit the Fock-space cutoff."""


class TruncationError(MomentCritError):
    """Norm/trace lost to truncation exceeds the allowed leakage."""


class NumericalInconsistencyError(MomentCritError):
    """Two computations of the same quantity disagree beyond tolerance."""


class GridLookupError(MomentCritError, KeyError):
    """A required (t, tau) sample is missing from a correlation grid."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing grid sample"


class SpecError(MomentCritError, ValueError):
    """An input file (state spec or correlation grid) failed validation."""
