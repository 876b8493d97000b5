class WhitneyDbarError(Exception):
    """Base exception for whitney_dbar errors."""

    exit_code: int = 1

    def __init__(self, message: str, exit_code: int | None = None) -> None:
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(message)


class InvalidInputError(WhitneyDbarError):
    """Rejected input (dimension mismatch, invalid geometry, bad level, etc)."""

    exit_code = 2


class NotComplexLinearOnComplexPart(InvalidInputError):
    """No complex-linear extension exists for the prescribed values."""

    pass


class FitRefusedError(InvalidInputError):
    """Fewer than 3 usable rows in a log-log fit."""

    pass


class ConfigError(InvalidInputError):
    """Experiment config failed validation."""

    pass


class BudgetExceededError(WhitneyDbarError):
    """Point, pair or node budget exceeded."""

    exit_code = 3


class NumericalContractError(WhitneyDbarError):
    """Non-finite values or a violated post-condition."""

    exit_code = 1
