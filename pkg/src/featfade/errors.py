"""Exception taxonomy with machine-readable error codes.

Every error carries a stable ``code`` string that is surfaced verbatim in CLI
diagnostics and HTTP error bodies.
"""

from __future__ import annotations


class FadeError(Exception):
    """Base class for all domain errors."""

    code = "internal"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class UnknownFeatureError(FadeError):
    code = "unknown-feature"


class UnknownRolloutError(FadeError):
    code = "unknown-rollout"


class FeatureConflictError(FadeError):
    code = "feature-conflict"


class InvalidScheduleError(FadeError):
    code = "invalid-schedule"


class IllegalTransitionError(FadeError):
    code = "illegal-transition"


class InsufficientHistoryError(FadeError):
    code = "insufficient-history"


class DegenerateLabelsError(FadeError):
    code = "degenerate-labels"


class MismatchedHorizonError(FadeError):
    code = "mismatched-horizon"


class OutOfOrderDayError(FadeError):
    code = "out-of-order-day"


class ConfigError(FadeError):
    code = "config-parse"
