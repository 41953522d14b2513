"""Exception hierarchy shared across the package."""


class CliquePartError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(CliquePartError, ValueError):
    pass


class InstanceValidationError(CliquePartError, ValueError):
    """An instance matrix violates symmetry, sign, diagonal or shape rules.

    ``pair`` holds the offending ``(i, j)`` index pair when one exists.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class DimensionError(CliquePartError, ValueError):
    pass


class FeasibilityError(CliquePartError, ValueError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class UndefinedGapError(CliquePartError, ValueError):
    pass


class IllegalActionError(CliquePartError, ValueError):
    pass


class ReplayError(CliquePartError, ValueError):
    def __init__(self, message, position):
        super().__init__(message)
        self.position = position


class NoActionError(CliquePartError, ValueError):
    pass


class ContractViolationError(CliquePartError, RuntimeError):
    pass


class SizeError(CliquePartError, ValueError):
    pass


class NumericError(CliquePartError, FloatingPointError):
    pass
