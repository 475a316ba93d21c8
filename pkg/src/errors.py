class LabError(Exception):
    """Base class for every error raised by the laboratory."""


class ConfigError(LabError, ValueError):
    """Invalid experiment config, model parameters or domain values."""


class DataFormatError(LabError, ValueError):
    """Malformed or unsorted input data (event logs, schedules)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateModelError(LabError):
    """All probability mass sits on 0 (no-click) outcomes."""


class EmptyPostSelectionError(LabError):
    """No trial survived post-selection of non-zero outcome pairs."""


class MissingSettingPairError(LabError, KeyError):
    """A setting pair required by an estimator is absent."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing setting pair"


class InsufficientGridError(LabError):
    """Fewer than two remote settings per local setting."""


class ZeroIntensityError(LabError, ZeroDivisionError):
    """Intensity ratio requested against a stage with zero mean intensity."""
