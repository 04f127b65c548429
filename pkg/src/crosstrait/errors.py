"""Exception hierarchy for the toolkit.

``CrosstraitError`` is the common base so callers can catch everything from
this package with one except clause.  The CLI maps subclasses onto exit
codes (usage 2, data 3, degenerate-regime refusal 4).
"""


class CrosstraitError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(CrosstraitError, ValueError):
    """Invalid or inconsistent parameters (sizes, variances, correlations)."""


class GenerationError(CrosstraitError, RuntimeError):
    """Simulation could not produce valid output (e.g. resampling cap hit)."""


class DataFormatError(CrosstraitError, ValueError):
    """Malformed input file; message carries file name and line number."""


class DegenerateScoreError(CrosstraitError, ValueError):
    """A correlation was requested against a zero-norm vector.

    Raised in particular when SNP screening emptied the risk score.
    """


class CorrectionUnavailableError(CrosstraitError, ValueError):
    """A bias correction needs a parameter that was not supplied."""


class DegenerateRegimeRefusal(CrosstraitError, RuntimeError):
    """Strict mode refused to correct an estimate in the degenerate regime."""


class ExperimentError(CrosstraitError, RuntimeError):
    """Too many replicate failures, or an invalid experiment configuration."""
