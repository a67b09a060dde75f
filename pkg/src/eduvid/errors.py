"""Exception types shared across the pipeline.

Every failure mode a caller may want to branch on gets its own class; the
CLI maps EduvidError to exit code 1 and the HTTP layer maps subsets to
404/409/422.
"""


class EduvidError(Exception):
    """Base class for all pipeline errors."""


# --- ingest ---------------------------------------------------------------

class NotFoundError(EduvidError):
    """Remote platform returned no item for the requested video id."""


class AuthError(EduvidError):
    """Remote platform rejected the API credential."""


class TransportError(EduvidError):
    """Network-level failure while talking to the remote platform."""


class EmptyComponentError(EduvidError):
    """A dataset-tag component normalised to the empty string."""


class SchemaError(EduvidError):
    """A CSV or JSON file is missing a mandatory column or key."""


class CsvRowError(EduvidError):
    """A CSV data row holds an out-of-range or non-numeric value."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class EncodingError(EduvidError):
    """Input bytes are not valid UTF-8."""


# --- frame streams / extraction -------------------------------------------

class BadMagicError(EduvidError):
    """Stream does not start with the EVF1 magic bytes."""


class TruncatedStreamError(EduvidError):
    """Stream ended before the declared frame count was delivered."""


class HeaderError(EduvidError):
    """Stream header declares a zero dimension or frame rate."""


class DimensionMismatchError(EduvidError):
    """Two frames being compared have different dimensions."""


class EmptyStreamError(EduvidError):
    """Operation requires at least one frame."""


class ZeroDurationError(EduvidError):
    """Rates are undefined for a zero-length video."""


class DecoderError(EduvidError):
    """External decoder command failed or produced an invalid stream."""


# --- dataset ---------------------------------------------------------------

class DuplicateKeyError(EduvidError):
    """The same video_id appears twice within one input source."""


# --- statistics ------------------------------------------------------------

class EmptyInputError(EduvidError):
    """Operation requires a non-empty value list."""


class LengthMismatchError(EduvidError):
    """Paired vectors have different lengths."""


class TooFewPointsError(EduvidError):
    """Not enough data points for the requested statistic."""


class ZeroVarianceError(EduvidError):
    """A correlation input has no variance."""


class SpanTooSmallError(EduvidError):
    """LOESS span selects fewer than two neighbours."""


class TooFewCompleteRowsError(EduvidError):
    """Analysis requires more complete dataset rows than are available."""


# --- modelling -------------------------------------------------------------

class TooFewRowsError(EduvidError):
    """Not enough rows to fit the requested model."""


class ZeroVarianceColumnError(EduvidError):
    """A feature column is constant and cannot be standardised."""

    def __init__(self, feature_name: str):
        super().__init__(f"feature {feature_name!r} has zero variance")
        self.feature_name = feature_name


class ZeroVarianceTargetError(EduvidError):
    """The target has no variance, so R-squared is undefined."""


class RankDeficientError(EduvidError):
    """Design matrix is not full column rank (perfect collinearity)."""


class NonFiniteInputError(EduvidError):
    """An input vector holds NaN or infinity."""


# --- workflow --------------------------------------------------------------

class StageOrderViolation(EduvidError):
    """A stage was requested before its predecessor produced its output."""
