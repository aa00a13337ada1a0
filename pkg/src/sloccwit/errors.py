"""Exception types raised by sloccwit."""


class SloccError(Exception):
    """Base class for all library errors."""


class ShapeError(SloccError, ValueError):
    """Operand dimensions do not match."""


class ValidationError(SloccError, ValueError):
    """An input violates a structural requirement (Hermiticity, normalization, ...)."""


class DegenerateOperatorError(SloccError, ArithmeticError):
    """Local operators annihilate the state, so the overlap ratio is undefined."""


class UnknownStateError(SloccError, KeyError):
    """A state identifier could not be parsed or is not in the catalog."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown state"


class BudgetExceededError(SloccError, RuntimeError):
    """An SDP instance is larger than the configured dimension/memory budget."""
