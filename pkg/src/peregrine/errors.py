"""Exception types shared across the package."""


class PeregrineError(Exception):
    """Base class for all library errors."""


class DecayViolation(PeregrineError):
    """A field on a line grid does not decay toward the truncation edge."""


class StepBlowup(PeregrineError):
    """The NLS perturbation grew past the blowup threshold."""


class ChordArcViolation(PeregrineError):
    """A curve fails the chord-arc (non-self-intersection) condition."""


class NoConvergence(PeregrineError):
    """An iteration stalled or exceeded its cap."""


class NormalizationMismatch(PeregrineError):
    """An NLS state carries the wrong equation normalization."""


class DivisionGuard(PeregrineError):
    """A denominator came too close to zero."""


class Degenerate(PeregrineError):
    """Input data is degenerate for the requested fit."""


class UsageError(PeregrineError):
    """Bad command-line or configuration input."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
