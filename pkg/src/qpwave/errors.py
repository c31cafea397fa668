class QPWaveError(Exception):
    """Base class for qpwave errors."""


class BudgetError(QPWaveError):
    """An enumeration or tuple sum would exceed the configured work budget."""


class ResonantLatticeError(QPWaveError):
    """An exact integer relation among the generators was found."""

    def __init__(self, message, relation=None):
        super().__init__(message)
        self.relation = relation


class NumericConsistencyError(QPWaveError):
    """A quantity that must be real (or must match its dual form) failed its check."""


class NonContractionError(QPWaveError):
    """Picard iteration did not contract within the allowed sweeps."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class DegenerateExtremizerError(QPWaveError):
    """The concentration family came out empty for the requested parameters."""
