"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class TkrrError(Exception):
    exit_code = 2


class ConfigError(TkrrError, ValueError):
    exit_code = 1


class NumericalError(TkrrError, ArithmeticError):
    exit_code = 2


class InvariantViolation(TkrrError, AssertionError):
    exit_code = 3
