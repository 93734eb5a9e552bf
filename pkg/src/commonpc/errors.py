"""Exception hierarchy. The CLI maps each family to an exit code."""


class CommonPCError(Exception):
    exit_code = 1


class InputError(CommonPCError, ValueError):
    """Bad arguments: dimension mismatch, invalid indices, malformed data."""

    exit_code = 2


class ConfigError(CommonPCError, ValueError):
    exit_code = 2


class NumericalError(CommonPCError, ArithmeticError):
    exit_code = 3


class TuningError(NumericalError):
    def __init__(self, message, last_acceptance=None):
        super().__init__(message)
        self.last_acceptance = last_acceptance


class DegenerateWeightsError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class AccuracyError(NumericalError):
    pass
