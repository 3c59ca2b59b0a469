"""Exception hierarchy shared by every module.

The CLI maps ``QigError`` subclasses onto exit codes: shape, dimension and
contract problems are domain violations (exit 3).
"""


class QigError(Exception):
    """Base class for all library errors."""


class InvalidDimensionError(QigError, ValueError):
    pass


class InvalidShapeError(QigError, ValueError):
    pass


class ContractViolationError(QigError, ValueError):
    pass


class InvalidMaskError(QigError, ValueError):
    pass


class InvalidIndexError(QigError, IndexError):
    pass


class InvalidConfigurationError(QigError, ValueError):
    pass


class ConvergenceError(QigError, RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual
