"""Exception types raised across memeflow."""


class MemeflowError(ValueError):
    """Base class for all library errors."""


class ValidationError(MemeflowError):
    """Input violates a documented invariant."""


class NonPositiveData(MemeflowError):
    pass


class DegenerateSeries(MemeflowError):
    pass


class TooFewSamples(MemeflowError):
    pass


class StepUnstable(MemeflowError):
    """Fixed-step integration left the admissible region."""


class SingularMatrix(MemeflowError):
    pass


class CsvFormatError(MemeflowError):
    """Malformed CSV input; ``line`` is 1-based and counts the header."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
