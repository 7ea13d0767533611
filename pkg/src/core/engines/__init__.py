"""
Numerical engines: Levy measure calculus, stable sampling, SDE integration,
generator evaluation and weak-error measurement.
"""
from . import (
    coefficients,
    generator_calculus,
    levy_measure,
    rng,
    sde_solver,
    stable_sampler,
    statistics,
    weak_error,
)

__all__ = [
    "coefficients",
    "generator_calculus",
    "levy_measure",
    "rng",
    "sde_solver",
    "stable_sampler",
    "statistics",
    "weak_error",
]
