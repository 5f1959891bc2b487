"""Exception hierarchy for the package.

Configuration problems (bad families, bad parameters, bad config files) and
numerical runtime failures (gap collapse, non-finite values, solver trouble)
are kept in separate branches so the CLI can map them to distinct exit codes.
"""

from __future__ import annotations


class AdiabaticJumpsError(Exception):
    """Base class for every error raised by this package."""


# --- configuration / construction errors -----------------------------------

class ConfigurationError(AdiabaticJumpsError):
    """A problem with user-supplied specifications, parameters or config files."""


class UnknownFamily(ConfigurationError):
    pass


class InvalidParameter(ConfigurationError):
    """Names the offending field in its message."""


class DimensionMismatch(ConfigurationError):
    pass


class OutOfDomain(ConfigurationError):
    """Dimensionless time outside [0, S] beyond the allowed slack."""


class ParseError(ConfigurationError):
    """Config file does not parse; message carries line/column when known."""


class ValidationError(ConfigurationError):
    """Config parsed but failed schema validation; message names the field."""


class DegenerateInput(ConfigurationError):
    """Regression input unusable (non-positive values, constant axis, too few points)."""


# --- numerical runtime errors ----------------------------------------------

class NumericalError(AdiabaticJumpsError):
    """A computation failed or produced untrustworthy values."""


class NumericalFailure(NumericalError):
    pass


class GapCollapse(NumericalError):
    """Instantaneous spectral gap fell below the configured tolerance."""

    def __init__(self, s: float, pair: tuple[int, int], gap: float, gap_tol: float):
        self.s = s
        self.pair = pair
        self.gap = gap
        self.gap_tol = gap_tol
        super().__init__(
            f"gap |e{pair[0]} - e{pair[1]}| = {gap:.3e} < gap_tol = {gap_tol:.3e} at s = {s:.6g}"
        )


class TrackingAmbiguous(NumericalError):
    """Level tracking overlap fell below threshold; the grid is too coarse."""

    def __init__(self, s: float, overlap: float):
        self.s = s
        self.overlap = overlap
        super().__init__(
            f"best tracking overlap {overlap:.3f} < 0.7 at s = {s:.6g}; refine the grid"
        )


class GridTooCoarse(NumericalError):
    """Grid violates the oscillation-resolving policy for the requested adiabaticity."""


class NonFinite(NumericalError):
    """NaN or Inf appeared where a finite value is required."""


class StepSizeUnderflow(NumericalError):
    """Adaptive integrator could not make progress."""


class OrderUnavailable(AdiabaticJumpsError):
    """Requested expansion order exceeds what was computed."""


class LevelOutOfRange(AdiabaticJumpsError):
    pass


class PathTooLong(AdiabaticJumpsError):
    """Nested-quadrature oracle only supports short jump paths."""


class PipelineError(AdiabaticJumpsError):
    """Wraps an error with the pipeline stage in which it occurred."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage={stage}: {cause}")
