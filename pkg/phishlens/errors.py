# The MIT License (MIT)
# Copyright © 2024 phishlens developers

"""
Error taxonomy shared by every phishlens module.

Each class carries the CLI exit code and the HTTP status it maps to, so the
command-line entry points and the HTTP service translate failures the same way.
"""

from typing import Any, Dict, Optional

EXIT_INPUT = 2
EXIT_BACKEND = 3


class PhishlensError(Exception):
    exit_code: int = EXIT_INPUT
    http_status: int = 400

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class ConfigError(PhishlensError):
    """Invalid or incomplete configuration (bad flag value, missing key, unknown condition)."""


# ----------------------------------------------------------------------
# email_ingest
# ----------------------------------------------------------------------


class IngestError(PhishlensError):
    pass


class MalformedMessage(IngestError):
    """The input does not look like an RFC-822/MIME message."""


class EmptyBody(IngestError):
    """No text/plain or text/html part could be found."""


class SchemaError(IngestError):
    """A dataset file does not conform to the CSV schema."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


# ----------------------------------------------------------------------
# enrichment
# ----------------------------------------------------------------------


class EnrichmentError(PhishlensError):
    exit_code = EXIT_BACKEND
    http_status = 502


class UnparseableUrl(EnrichmentError):
    exit_code = EXIT_INPUT
    http_status = 400


class AuthError(EnrichmentError):
    pass


class RateLimited(EnrichmentError):
    http_status = 429


class NotFound(EnrichmentError):
    """The reputation service has never scanned the URL."""


class TransportError(EnrichmentError):
    pass


# ----------------------------------------------------------------------
# prompting
# ----------------------------------------------------------------------


class PromptingError(PhishlensError):
    exit_code = EXIT_BACKEND
    http_status = 502


class BackendError(PromptingError):
    pass


class BackendTransportError(BackendError):
    """Network failure or a retryable status from the chat backend."""


class BackendAuthError(BackendError):
    pass


class FixtureMissing(BackendError):
    """The scripted backend holds no response for the conversation."""


class ResponseParseError(PromptingError):
    pass


class NoJsonFound(ResponseParseError):
    pass


class MissingField(ResponseParseError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing field: {name}")


class BadLabel(ResponseParseError):
    def __init__(self, value: Any):
        self.value = value
        super().__init__(f"label must be 'phishing' or 'legit', got {value!r}")


class ProbabilityOutOfRange(ResponseParseError):
    def __init__(self, value: Any):
        self.value = value
        super().__init__(f"phishing_probability out of range: {value!r}")


class ExplanationCountOutOfBounds(ResponseParseError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"explanation must list 3 to 5 features, got {n}")


# ----------------------------------------------------------------------
# warning
# ----------------------------------------------------------------------


class WarningError(PhishlensError):
    pass


class RenderPrecondition(WarningError):
    """A warning was requested for a legit verdict without a primed feature."""


# ----------------------------------------------------------------------
# evaluation statistics
# ----------------------------------------------------------------------


class StatsError(PhishlensError):
    pass


class SingleClass(StatsError):
    pass


class DegenerateTable(StatsError):
    """A 2x2 table has a zero margin; its p-value is defined as 1."""

    p_value = 1.0


class ZeroWithinVariance(StatsError):
    """Every group is constant; F and p take their limiting values."""

    def __init__(self, f: float, p_value: float):
        self.f = f
        self.p_value = p_value
        super().__init__(f"zero within-group variance (F={f}, p={p_value})")


class InsufficientGroups(StatsError):
    pass
