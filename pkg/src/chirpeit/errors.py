"""Exception hierarchy; the CLI maps these onto exit codes."""


class ChirpEITError(Exception):
    pass


class ValidationError(ChirpEITError, ValueError):
    """Bad parameters or a grid that cannot represent the requested pulse."""


class NumericalError(ChirpEITError, ArithmeticError):
    """Singular matrices, poles on the grid, overflow."""
