from typing import Optional


class RamaError(Exception):
    """Base class for all errors raised by rama."""


class ParameterError(RamaError, ValueError):
    """Invalid or unsupported parameters (non-prime p, even q, d < 2, ...)."""


class DomainError(RamaError, ArithmeticError):
    """Mathematically undefined input: zero inverse, singular matrix, disconnected graph."""


class PreconditionError(RamaError, ValueError):
    """An operation was called on input that does not meet its contract."""


class ConsistencyError(RamaError, RuntimeError):
    """An internal identity that must hold did not (order mismatch, cardinality mismatch)."""


class NotFoundError(RamaError, LookupError):
    """A deterministic search finished without an admissible candidate."""


class BudgetExceededError(RamaError, MemoryError):
    """A size budget was exceeded; `count` is the number of items built so far."""

    def __init__(self, message: str, count: int):
        super().__init__(f"{message} (count so far: {count})")
        self.count = count


class ParseError(RamaError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line


class NumericError(RamaError, ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual
