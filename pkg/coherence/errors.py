"""Exception hierarchy shared by the library and the command line."""


class CoherenceError(Exception):
    """Base class for every error raised by the coherence toolkit."""

    exit_code: int = 2


class InvalidParameterError(CoherenceError, ValueError):
    """An angle, qubit count, axis, probability or config value is out of range."""


class DimensionMismatchError(CoherenceError, ValueError):
    """Operands live on Hilbert spaces of different dimension."""


class MissingObservationError(CoherenceError, KeyError):
    """A constraint, setting or input pair has no data attached."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""


class DegenerateCountsError(CoherenceError, ValueError):
    """A setting collected zero coincidences, so no estimate exists."""


class NumericalError(CoherenceError, ArithmeticError):
    """A numerical routine did not reach its accuracy target."""

    exit_code = 3
