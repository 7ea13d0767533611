"""
Stable Sampler - Increments of the one-dimensional L^{alpha,beta} and of the
cylindrical d-dimensional process.

Two interchangeable methods are offered: the Chambers-Mallows-Stuck transform
(exact in law) and the small-jump/large-jump decomposition with a Gaussian
surrogate for the compensated small jumps. A third mode draws the alpha -> 2
Gaussian limit from the same uniforms as the transform.
"""
import logging
import math
from typing import Optional

import numpy as np

from ..exceptions import ParameterDomainError
from ..models.schemas import (
    CylindricalNoiseSpec,
    IncrementSamplerMode,
    LevyMeasureSpec,
    RngStreamKey,
    SamplerMode,
    StableIncrement,
    check_alpha,
    check_beta,
    check_positive,
)
from . import levy_measure
from .rng import derive_key, generator_for, uniform_pair

logger = logging.getLogger(__name__)


def skew_angle(alpha: float, beta: float) -> float:
    """B = arctan(beta tan(pi alpha/2)) / alpha"""
    return math.atan(beta * math.tan(math.pi * alpha / 2.0)) / alpha


def _transform(alpha: float, beta: float, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    Chambers-Mallows-Stuck map of (V, W) to a zero-mean stable variate with
    characteristic exponent -|xi|^alpha (1 - i beta sign(xi) tan(pi alpha/2)).
    """
    b = skew_angle(alpha, beta)
    scale = (1.0 + (beta * math.tan(math.pi * alpha / 2.0)) ** 2) ** (1.0 / (2.0 * alpha))
    shifted = alpha * (v + b)
    return (
        scale
        * np.sin(shifted)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - shifted) / w) ** ((1.0 - alpha) / alpha)
    )


def _gaussian(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Standard normal from the same (V, W) pair: sqrt(2W) sin V"""
    return np.sqrt(2.0 * w) * np.sin(v)


def sample_standard_stable(alpha: float, beta: float, key: RngStreamKey, size=None):
    """
    Zero-mean, unit-scale stable draw(s); the scale is the one fixed by
    c_plus + c_minus = K_alpha, so no extra factor is applied.
    """
    alpha = check_alpha(alpha)
    beta = check_beta(beta)
    v, w = uniform_pair(key, size)
    out = _transform(alpha, beta, v, w)
    return float(out) if size is None else out


def sample_gaussian_limit(key: RngStreamKey, size=None):
    """Normal(0, 2) draw(s): the alpha -> 2 law of sample_standard_stable"""
    v, w = uniform_pair(key, size)
    out = math.sqrt(2.0) * _gaussian(v, w)
    return float(out) if size is None else out


def default_delta(alpha: float, dt: float) -> float:
    """min(1, dt^{1/alpha})"""
    return min(1.0, dt ** (1.0 / alpha))


def _exact_increment(spec: LevyMeasureSpec, dt: float, key: RngStreamKey, size) -> np.ndarray:
    s = sample_standard_stable(spec.alpha, spec.beta, key, size)
    return dt ** (1.0 / spec.alpha) * s + dt * levy_measure.tail_mean(spec, 1.0)


def _decomposed_increment(
    spec: LevyMeasureSpec, dt: float, delta: float, key: RngStreamKey, size
) -> np.ndarray:
    a = spec.alpha
    rng = generator_for(key)
    shape = () if size is None else size
    n = int(np.prod(shape)) if shape != () else 1

    small_var = levy_measure.truncated_second_moment(spec, delta)
    gauss = math.sqrt(dt * small_var) * rng.standard_normal(n)

    rate = levy_measure.jump_intensity(spec, delta)
    counts = rng.poisson(dt * rate, size=n)
    total = int(counts.sum())
    jumps = np.zeros(n)
    if total:
        magnitude = delta * rng.random(total) ** (-1.0 / a)
        positive = rng.random(total) < spec.c_plus / spec.kappa
        sizes = np.where(positive, magnitude, -magnitude)
        owner = np.repeat(np.arange(n), counts)
        jumps = np.bincount(owner, weights=sizes, minlength=n)

    # jumps in delta < |z| <= 1 are compensated in the process definition
    drift = -(levy_measure.tail_mean(spec, delta) - levy_measure.tail_mean(spec, 1.0))
    out = gauss + jumps + dt * drift
    return out.reshape(shape) if size is not None else out[0]


def _draw(
    spec: LevyMeasureSpec,
    dt: float,
    mode: IncrementSamplerMode,
    key: RngStreamKey,
    size,
) -> np.ndarray:
    if mode.mode is SamplerMode.EXACT_TRANSFORM:
        return _exact_increment(spec, dt, key, size)
    if mode.mode is SamplerMode.DECOMPOSITION:
        delta = mode.delta if mode.delta is not None else default_delta(spec.alpha, dt)
        return _decomposed_increment(spec, dt, delta, key, size)
    return math.sqrt(dt) * sample_gaussian_limit(key, size)


def sample_increment(
    spec: LevyMeasureSpec, dt: float, key: RngStreamKey, size=None
) -> StableIncrement:
    """
    dt^{1/alpha} S + dt m1: the law of L_dt for the |z| <= 1 compensated process.

    Args:
        spec: Levy measure of the component
        dt: Time step, > 0
        key: Stream of the draw
        size: None for a scalar, else the sample shape

    Returns:
        StableIncrement carrying the value(s) and dt
    """
    dt = check_positive(dt, "dt")
    return StableIncrement(value=_exact_increment(spec, dt, key, size), dt=dt)


def sample_decomposed_increment(
    spec: LevyMeasureSpec,
    dt: float,
    mode: IncrementSamplerMode,
    key: RngStreamKey,
    size=None,
) -> StableIncrement:
    """
    Gaussian small jumps + compound Poisson large jumps + band compensator.

    G ~ Normal(0, dt * truncated_second_moment(delta)),
    J = sum of Poisson(dt * lambda(delta)) jumps of size +/- delta U^{-1/alpha},
    c(delta) = -(tail_mean(delta) - tail_mean(1)).
    """
    dt = check_positive(dt, "dt")
    if mode.mode is not SamplerMode.DECOMPOSITION:
        raise ParameterDomainError("mode", mode.mode.value, "{decomposition}")
    delta = mode.delta if mode.delta is not None else default_delta(spec.alpha, dt)
    if not (0.0 < delta <= 1.0):
        raise ParameterDomainError("delta", delta, "(0, 1]")
    return StableIncrement(value=_decomposed_increment(spec, dt, delta, key, size), dt=dt)


def sample_cylindrical_increment(
    noise: CylindricalNoiseSpec,
    dt: float,
    mode: IncrementSamplerMode,
    key: RngStreamKey,
    size: Optional[int] = None,
) -> np.ndarray:
    """
    Independent components; component i uses the stream derived from (key, i).

    Args:
        noise: Cylindrical noise spec
        dt: Time step
        mode: exact_transform, decomposition or gaussian_limit
        key: Parent stream of the step
        size: Number of rows, or None

    Returns:
        Array of shape (d,) when size is None, else (size, d)
    """
    dt = check_positive(dt, "dt")
    columns = [
        np.atleast_1d(_draw(component, dt, mode, derive_key(key, i), size))
        for i, component in enumerate(noise.components)
    ]
    out = np.stack(columns, axis=-1)
    return out[0] if size is None else out


def sample_gaussian_cylindrical_increment(
    dimension: int, dt: float, key: RngStreamKey, size: Optional[int] = None
) -> np.ndarray:
    """
    sqrt(2 dt) xi with xi standard d-dimensional normal, laid out on the same
    per-component streams as sample_cylindrical_increment.
    """
    dt = check_positive(dt, "dt")
    columns = [
        np.atleast_1d(math.sqrt(dt) * sample_gaussian_limit(derive_key(key, i), size))
        for i in range(dimension)
    ]
    out = np.stack(columns, axis=-1)
    return out[0] if size is None else out
