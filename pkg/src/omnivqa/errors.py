"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI when
reporting failures.
"""


class OmniVQAError(Exception):
    code = "error"


class InvalidFovError(OmniVQAError, ValueError):
    code = "invalid-fov"


class DimensionMismatchError(OmniVQAError, ValueError):
    code = "dimension-mismatch"


class FrameTooSmallError(OmniVQAError, ValueError):
    code = "frame-too-small"


class EmptySeriesError(OmniVQAError, ValueError):
    code = "empty-series"


class NegativeInputError(OmniVQAError, ValueError):
    code = "negative-input"


class ZeroVarianceError(OmniVQAError, ValueError):
    code = "zero-variance"


class LengthMismatchError(OmniVQAError, ValueError):
    code = "length-mismatch"


class DegenerateInputError(OmniVQAError, ValueError):
    code = "degenerate-input"


class TooFewGroupsError(OmniVQAError, ValueError):
    code = "too-few-groups"


class NonFiniteInputError(OmniVQAError, ValueError):
    code = "non-finite-input"


class LayoutMismatchError(OmniVQAError, ValueError):
    code = "layout-mismatch"


class SplitOverlapError(OmniVQAError, ValueError):
    code = "overlap-between-splits"


class ManifestError(OmniVQAError, ValueError):
    code = "parse-error"


class MissingFieldError(ManifestError):
    code = "missing-field"


class DanglingPathError(ManifestError):
    code = "dangling-path"


class DuplicateVideoError(ManifestError):
    code = "duplicate-video-id"


class TruncatedFileError(OmniVQAError, IOError):
    code = "truncated-file"

    def __init__(self, message, frame_index=None):
        super().__init__(message)
        self.frame_index = frame_index


class FormatUnknownError(OmniVQAError, ValueError):
    code = "format-unknown"


class ProvenanceMismatchError(OmniVQAError, ValueError):
    code = "provenance-mismatch"


class CacheParseError(OmniVQAError, ValueError):
    code = "parse-error"


class FrameCountMismatchError(OmniVQAError, ValueError):
    code = "frame-count-mismatch"
