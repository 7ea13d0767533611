"""
Error types raised by the simulation engines and the experiment runner.
"""
from typing import Any, Optional


class SimulationError(Exception):
    """Base class for every error raised by this package"""

    # "domain" for invalid inputs, "numerical" for failures of a valid computation
    category = "numerical"


class ParameterDomainError(SimulationError, ValueError):
    """A parameter lies outside its legal interval"""

    category = "domain"

    def __init__(self, field: str, value: Any, interval: str, message: Optional[str] = None):
        self.field = field
        self.value = value
        self.interval = interval
        super().__init__(message or f"{field}={value!r} is outside the legal range {interval}")


class DivergentIntegralError(ParameterDomainError):
    """The requested Levy-measure integral is infinite"""


class PreconditionError(SimulationError, ValueError):
    """An operation was called with inputs that void its guarantees"""

    category = "domain"


class QuadratureAccuracyError(SimulationError, ArithmeticError):
    """Adaptive quadrature error bound exceeds the requested tolerance"""

    def __init__(self, estimate: float, error_bound: float, tolerance: float, what: str = "integral"):
        self.estimate = estimate
        self.error_bound = error_bound
        self.tolerance = tolerance
        super().__init__(
            f"{what}: estimate {estimate:.6g} has error bound {error_bound:.3g} "
            f"above tolerance {tolerance:.3g}"
        )


class PathDivergenceError(SimulationError, ArithmeticError):
    """A simulated state became non-finite"""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite state at step {step}")


class InsufficientDataError(SimulationError, ValueError):
    """Too few usable points for a regression"""


class ConfigError(SimulationError):
    """Experiment configuration could not be parsed or validated"""

    category = "domain"

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        context = []
        if line is not None:
            context.append(f"line {line}")
        if field is not None:
            context.append(f"field '{field}'")
        prefix = f"[{', '.join(context)}] " if context else ""
        super().__init__(prefix + message)


class AcceptanceFailure(SimulationError):
    """One or more numerical acceptance checks failed"""

    def __init__(self, failed: list):
        self.failed = failed
        super().__init__(f"{len(failed)} acceptance check(s) failed: {', '.join(failed)}")
