"""Exception hierarchy shared by the numerical engine, the CLI and the API."""

from typing import Any, Optional


class LDPError(Exception):
    """Base class for every failure raised by the toolkit."""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict:
        """Machine-readable form written to stderr by the CLI."""
        payload = {"error": type(self).__name__, "message": self.message}
        payload.update({k: _plain(v) for k, v in self.context.items()})
        return payload


class DomainError(LDPError, ValueError):
    """Argument outside the domain of an operation (shape, range, symbol)."""


class StationarityError(DomainError):
    """A k-tuple distribution violates the consistency constraints."""

    def __init__(self, message: str, max_violation: float):
        super().__init__(f"{message} (max_violation={max_violation:.3e})", max_violation=max_violation)
        self.max_violation = max_violation


class HypothesisError(LDPError):
    """A theorem hypothesis is not met, so the check cannot be certified."""


class BudgetExceededError(LDPError):
    """Exhaustive enumeration would exceed the configured path-step budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"enumeration needs {required} path-steps, budget is {budget}",
            required=required,
            budget=budget,
        )
        self.required = required
        self.budget = budget


class ConvergenceError(LDPError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message: str, best: Any = None, residual: Optional[float] = None):
        super().__init__(message, best=best, residual=residual)
        self.best = best
        self.residual = residual


class ReconstructionError(LDPError):
    """Replaying follower sets got stuck before consuming every symbol."""

    def __init__(self, message: str, node: int):
        super().__init__(message, node=node)
        self.node = node


def _plain(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    return value
