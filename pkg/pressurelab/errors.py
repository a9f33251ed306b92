# pressurelab/errors.py

"""
Exception hierarchy for pressurelab.

The CLI maps these onto exit codes:
    ValidationError / ConfigError -> 2
    NumericalError / HypothesisError -> 3
"""


class PressureLabError(Exception):
    """Base class for every error raised by pressurelab."""
    exit_code = 1


class ValidationError(PressureLabError, ValueError):
    """Invalid input to an operation (bad word, bad measure, bad epsilon...)."""
    exit_code = 2


class ConfigError(ValidationError):
    """Config document failed validation; the message names key and constraint."""

    def __init__(self, key, constraint):
        self.key = key
        self.constraint = constraint
        super().__init__(f"{key}: {constraint}")


class NumericalError(PressureLabError, ArithmeticError):
    """A numerical procedure failed or is undefined for the given input."""
    exit_code = 3


class HypothesisError(PressureLabError):
    """A hypothesis the closed form relies on does not hold; the computation is refused."""
    exit_code = 3
