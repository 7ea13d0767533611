"""
SDE Solver - Euler-Maruyama for the stable-driven SDE and its Brownian limit.

    jump:      X_{k+1} = X_k + b~(X_k) h + sigma(X_k) dL_k
    diffusion: X_{k+1} = X_k + b(X_k) h + sqrt(2) sigma(X_k) sqrt(h) xi_k

Coefficients are evaluated at the pre-jump state. Step k draws from the
stream derived from (key, k), and component i of that step from (key, k, i);
the Gaussian increments of both schemes share this layout, so equal keys give
common random numbers.
"""
import logging
from typing import Callable, Iterable, Optional

import numpy as np

from ..exceptions import ParameterDomainError, PathDivergenceError
from ..models.schemas import (
    CoefficientField,
    CylindricalNoiseSpec,
    IncrementSamplerMode,
    PathEnsemble,
    RngStreamKey,
    SamplePath,
    TimeGrid,
)
from .rng import derive_key
from .stable_sampler import sample_cylindrical_increment, sample_gaussian_cylindrical_increment

logger = logging.getLogger(__name__)

IncrementDraw = Callable[[RngStreamKey, int], np.ndarray]


def _initial_state(coeffs: CoefficientField, x0, noise_dimension: Optional[int] = None) -> np.ndarray:
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (coeffs.dimension,):
        raise ParameterDomainError("x0", x0.shape, f"({coeffs.dimension},)")
    if noise_dimension is not None and noise_dimension != coeffs.dimension:
        raise ParameterDomainError("noise.dimension", noise_dimension, f"{{{coeffs.dimension}}}")
    sigma0 = coeffs.diffusion_at(x0)
    if sigma0.shape != (1, coeffs.dimension, coeffs.dimension):
        raise ParameterDomainError("diffusion shape", sigma0.shape[1:], f"({coeffs.dimension}, {coeffs.dimension})")
    return x0


def _integrate(
    coeffs: CoefficientField,
    grid: TimeGrid,
    x0: np.ndarray,
    key: RngStreamKey,
    n_paths: int,
    draw: IncrementDraw,
    taming: bool,
    record: bool,
) -> PathEnsemble:
    h = grid.h
    x = np.tile(x0, (n_paths, 1))
    alive = np.ones(n_paths, dtype=bool)
    running_sup = np.linalg.norm(x, axis=-1)
    states = [x.copy()] if record else None

    for k in range(grid.n_steps):
        increment = draw(derive_key(key, k), n_paths)
        with np.errstate(over="ignore", invalid="ignore"):
            b = coeffs.drift_at(x)
            if taming:
                b = b / (1.0 + h * np.linalg.norm(b, axis=-1, keepdims=True))
            sigma = coeffs.diffusion_at(x)
            proposal = x + b * h + np.einsum("nij,nj->ni", sigma, increment)
            finite = np.all(np.isfinite(proposal), axis=-1)
        newly_bad = alive & ~finite
        if newly_bad.any():
            logger.debug("step %d: %d path(s) diverged", k + 1, int(newly_bad.sum()))
            if n_paths == 1:
                raise PathDivergenceError(step=k + 1)
        alive &= finite
        x = np.where(alive[:, None], proposal, x)
        with np.errstate(over="ignore"):
            running_sup = np.maximum(running_sup, np.linalg.norm(x, axis=-1))
        if record:
            states.append(x.copy())

    ensemble = PathEnsemble(
        terminal=x,
        diverged=~alive,
        running_sup=running_sup,
        states=np.stack(states) if record else None,
    )
    if ensemble.divergence_fraction > 0:
        logger.warning(
            "%d of %d paths diverged (fraction %.2e)",
            int((~alive).sum()), n_paths, ensemble.divergence_fraction,
        )
    return ensemble


def simulate_jump_ensemble(
    coeffs: CoefficientField,
    noise: CylindricalNoiseSpec,
    grid: TimeGrid,
    x0,
    mode: IncrementSamplerMode,
    key: RngStreamKey,
    n_paths: int,
    taming: bool = False,
    record: bool = False,
) -> PathEnsemble:
    """
    n_paths Euler-Maruyama paths of the stable-driven SDE.

    Args:
        coeffs: Drift and diffusion
        noise: Cylindrical noise; its dimension must match coeffs
        grid: Horizon and step count
        x0: Start point shared by every path
        mode: Increment sampler
        key: Step k draws from derive_key(key, k)
        n_paths: Number of paths, >= 1
        taming: Divide the drift increment by 1 + h|b|
        record: Keep every state, not just the terminal one

    Returns:
        PathEnsemble; paths that leave the finite range are frozen and flagged
    """
    if n_paths < 1:
        raise ParameterDomainError("n_paths", n_paths, "[1, inf)")
    x0 = _initial_state(coeffs, x0, noise.dimension)

    def draw(step_key: RngStreamKey, n: int) -> np.ndarray:
        return sample_cylindrical_increment(noise, grid.h, mode, step_key, size=n)

    return _integrate(coeffs, grid, x0, key, n_paths, draw, taming, record)


def simulate_diffusion_ensemble(
    coeffs: CoefficientField,
    grid: TimeGrid,
    x0,
    key: RngStreamKey,
    n_paths: int,
    record: bool = False,
) -> PathEnsemble:
    """n_paths Euler-Maruyama paths of the Brownian limit SDE"""
    if n_paths < 1:
        raise ParameterDomainError("n_paths", n_paths, "[1, inf)")
    x0 = _initial_state(coeffs, x0)
    d = coeffs.dimension

    def draw(step_key: RngStreamKey, n: int) -> np.ndarray:
        return sample_gaussian_cylindrical_increment(d, grid.h, step_key, size=n)

    return _integrate(coeffs, grid, x0, key, n_paths, draw, False, record)


def euler_maruyama_jump(
    coeffs: CoefficientField,
    noise: CylindricalNoiseSpec,
    grid: TimeGrid,
    x0,
    mode: IncrementSamplerMode,
    key: RngStreamKey,
    taming: bool = False,
) -> SamplePath:
    """
    One path of dX = b(X) dt + sigma(X_-) dL.

    Raises:
        PathDivergenceError: a state became non-finite (reports the step index)
    """
    ensemble = simulate_jump_ensemble(coeffs, noise, grid, x0, mode, key, 1, taming, record=True)
    return SamplePath(grid=grid, states=ensemble.states[:, 0, :], key=key)


def euler_maruyama_diffusion(
    coeffs: CoefficientField,
    grid: TimeGrid,
    x0,
    key: RngStreamKey,
) -> SamplePath:
    """One path of dX = b(X) dt + sqrt(2) sigma(X) dB"""
    ensemble = simulate_diffusion_ensemble(coeffs, grid, x0, key, 1, record=True)
    return SamplePath(grid=grid, states=ensemble.states[:, 0, :], key=key)


def sup_moment_statistic(paths: Iterable[SamplePath], theta: float) -> float:
    """Monte Carlo mean of (sup_k |X_k|)^theta over the paths"""
    if not (0.0 < theta < 1.0):
        raise ParameterDomainError("theta", theta, "(0, 1)")
    sups = [float(np.max(np.linalg.norm(p.states, axis=-1))) for p in paths]
    if not sups:
        raise ParameterDomainError("paths", 0, "nonempty collection")
    return float(np.mean(np.asarray(sups) ** theta))


def ensemble_sup_moment(ensemble: PathEnsemble, theta: float) -> float:
    """sup_moment_statistic over the non-diverged paths of an ensemble"""
    if not (0.0 < theta < 1.0):
        raise ParameterDomainError("theta", theta, "(0, 1)")
    sups = ensemble.running_sup[~ensemble.diverged]
    if sups.size == 0:
        raise ParameterDomainError("paths", 0, "nonempty collection")
    return float(np.mean(sups**theta))
