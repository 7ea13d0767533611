"""
Generator Calculus - Deterministic evaluation of the nonlocal generator of the
stable-driven SDE and of the second-order generator of its Brownian limit.

For component i with jump direction v = sigma_i(x) the nonlocal part is split
at delta and at 1:

    small jumps  |z| <= delta      second-order remainder, Taylor form
    band         delta < |z| <= 1  second-order remainder
    large jumps  |z| > 1           f(x + z v) - f(x)

The small-jump remainder is written z^2 q(z) with
q(z) = int_0^1 (1 - s) v.H(f)(x + s z v).v ds, so q(0) = v.H(f)(x).v / 2 and the
base-point part reduces to q(0) * truncated_second_moment(delta).
"""
import logging
import math
import warnings
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import integrate

from ..exceptions import ParameterDomainError, PreconditionError, QuadratureAccuracyError
from ..models.schemas import (
    CoefficientField,
    CoefficientPreset,
    CylindricalNoiseSpec,
    GeneratorEvalReport,
    LevyMeasureSpec,
    ResidualEstimate,
    RngStreamKey,
    TestFunction,
    TimeGrid,
)
from . import levy_measure
from .sde_solver import simulate_diffusion_ensemble

logger = logging.getLogger(__name__)

DEFAULT_DELTA_SPLIT = 0.5
DEFAULT_TOL = 1e-9
# below this |z| the naive remainder f(x+zv) - f(x) - z v.grad f loses digits
NAIVE_THRESHOLD = 1e-3
QUAD_LIMIT = 400

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_S_NODES = 0.5 * (_GL_NODES + 1.0)
_S_WEIGHTS = 0.5 * _GL_WEIGHTS * (1.0 - _S_NODES)


def _as_point(x, dimension: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (dimension,):
        raise ParameterDomainError("x", x.shape, f"({dimension},)")
    return x


def limit_generator_terms(b: np.ndarray, sigma: np.ndarray, grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """
    b.grad f + Tr(sigma sigma^T H(f)); broadcasts over leading axes.

    The trace term carries coefficient 1, matching the sqrt(2) sigma dB noise.
    """
    drift = np.sum(b * grad, axis=-1)
    a = np.einsum("...ik,...jk->...ij", sigma, sigma)
    return drift + np.einsum("...ij,...ji->...", a, hess)


def apply_limit_generator(coeffs: CoefficientField, f: TestFunction, x) -> float:
    """L f(x) = b(x).grad f(x) + Tr(sigma sigma^T H(f))(x)"""
    if f.dimension != coeffs.dimension:
        raise ParameterDomainError("f.dimension", f.dimension, f"{{{coeffs.dimension}}}")
    x = _as_point(x, coeffs.dimension)
    return float(
        limit_generator_terms(
            coeffs.drift_at(x)[0], coeffs.diffusion_at(x)[0], f.gradient(x)[0], f.hessian(x)[0]
        )
    )


def taylor_remainder(f: TestFunction, x: np.ndarray, v: np.ndarray, z: float) -> float:
    """f(x+zv) - f(x) - z v.grad f(x) as z^2 int_0^1 (1-s) v.H(x+szv).v ds"""
    return z * z * _q(f, x, v, z)


def naive_remainder(f: TestFunction, x: np.ndarray, v: np.ndarray, z: float) -> float:
    return float(f.eval(x + z * v)[0] - f.eval(x)[0] - z * (f.gradient(x)[0] @ v))


def _q(f: TestFunction, x: np.ndarray, v: np.ndarray, z: float) -> float:
    points = x + np.outer(_S_NODES * z, v)
    hess = f.hessian(points)
    curvature = np.einsum("i,mij,j->m", v, hess, v)
    return float(curvature @ _S_WEIGHTS)


def _remainder(f: TestFunction, x: np.ndarray, v: np.ndarray, z: float) -> float:
    if abs(z) < NAIVE_THRESHOLD:
        return taylor_remainder(f, x, v, z)
    return naive_remainder(f, x, v, z)


def _quad(func, lower, upper, tol: float, what: str, **kwargs) -> Tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr = integrate.quad(func, lower, upper, limit=QUAD_LIMIT, **kwargs)
    if not (abserr <= tol) or not math.isfinite(value):
        raise QuadratureAccuracyError(value, abserr, tol, what=what)
    return value, abserr


def _sides(spec: LevyMeasureSpec):
    return ((1.0, spec.c_plus), (-1.0, spec.c_minus))


def _small_jump_term(f, x, v, spec, delta, tol) -> Tuple[float, float]:
    a = spec.alpha
    q0 = 0.5 * float(v @ f.hessian(x)[0] @ v)
    value = q0 * levy_measure.truncated_second_moment(spec, delta)
    error = 0.0
    for sign, weight in _sides(spec):
        if weight == 0.0:
            continue

        def integrand(u, sign=sign):
            z = math.exp(u)
            return math.exp((2.0 - a) * u) * (_q(f, x, v, sign * z) - q0)

        part, err = _quad(
            integrand, -math.inf, math.log(delta), tol,
            "small-jump correction", epsabs=tol / 10.0, epsrel=1e-10,
        )
        value += weight * part
        error += weight * err
    return value, error


def _band_term(f, x, v, spec, delta, tol) -> Tuple[float, float]:
    if delta >= 1.0:
        return 0.0, 0.0
    a = spec.alpha
    value = error = 0.0
    for sign, weight in _sides(spec):
        if weight == 0.0:
            continue

        def integrand(u, sign=sign):
            return _remainder(f, x, v, sign * math.exp(u)) * math.exp(-a * u)

        part, err = _quad(
            integrand, math.log(delta), 0.0, tol,
            "band integral", epsabs=tol / 10.0, epsrel=1e-10,
        )
        value += weight * part
        error += weight * err
    return value, error


def _large_jump_term(f, x, v, spec, tol) -> Tuple[float, float]:
    a = spec.alpha
    fx = float(f.eval(x)[0])
    value = -fx * levy_measure.jump_intensity(spec, 1.0)
    error = 0.0

    if f.wave is not None:
        # A cos(theta + omega z) on both half-lines via Fourier-weighted quadrature
        xi = np.asarray(f.wave.wave_vector)
        theta = float(xi @ x) + f.wave.phase
        omega = float(xi @ v)
        amp = f.wave.amplitude
        if omega == 0.0:
            cos_int, sin_int, err_c, err_s = 1.0 / a, 0.0, 0.0, 0.0
        else:
            density = lambda z: z ** (-1.0 - a)  # noqa: E731
            cos_int, err_c = _quad(density, 1.0, math.inf, tol, "large-jump cos",
                                   weight="cos", wvar=abs(omega), epsabs=tol / 10.0)
            sin_int, err_s = _quad(density, 1.0, math.inf, tol, "large-jump sin",
                                   weight="sin", wvar=abs(omega), epsabs=tol / 10.0)
            sin_int *= math.copysign(1.0, omega)
        for sign, weight in _sides(spec):
            part = amp * (math.cos(theta) * cos_int - sign * math.sin(theta) * sin_int)
            value += weight * part
            error += weight * abs(amp) * (err_c + err_s)
        return value, error

    for sign, weight in _sides(spec):
        if weight == 0.0:
            continue

        def integrand(u, sign=sign):
            return float(f.eval(x + sign * math.exp(u) * v)[0]) * math.exp(-a * u)

        part, err = _quad(integrand, 0.0, math.inf, tol, "large-jump integral",
                          epsabs=tol / 10.0, epsrel=1e-10)
        value += weight * part
        error += weight * err
    return value, error


def alpha_generator_terms(
    coeffs: CoefficientField,
    noise: CylindricalNoiseSpec,
    f: TestFunction,
    x,
    delta_split: float = DEFAULT_DELTA_SPLIT,
    tol: float = DEFAULT_TOL,
) -> Dict[str, float]:
    """
    Per-term evaluation of the nonlocal generator at x (see module docstring).

    Args:
        coeffs: Drift and diffusion of the SDE
        noise: Cylindrical noise; component i jumps along column i of sigma(x)
        f: Bounded test function with analytic derivatives
        x: Evaluation point of shape (d,)
        delta_split: Radius splitting the small-jump Taylor term from the band
        tol: Absolute tolerance for every quadrature

    Returns:
        Dict with keys drift, small, band, large and error (summed error bounds)
    """
    if not f.bounded:
        raise PreconditionError("the nonlocal generator needs a bounded test function")
    if not (0.0 < delta_split <= 1.0):
        raise ParameterDomainError("delta_split", delta_split, "(0, 1]")
    if noise.dimension != coeffs.dimension or f.dimension != coeffs.dimension:
        raise ParameterDomainError("dimension", (noise.dimension, f.dimension), f"{{{coeffs.dimension}}}")
    x = _as_point(x, coeffs.dimension)

    sigma = coeffs.diffusion_at(x)[0]
    terms = {
        "drift": float(coeffs.drift_at(x)[0] @ f.gradient(x)[0]),
        "small": 0.0,
        "band": 0.0,
        "large": 0.0,
        "error": 0.0,
    }
    for i, spec in enumerate(noise.components):
        v = sigma[:, i]
        if not np.any(v):
            continue
        for name, (value, err) in (
            ("small", _small_jump_term(f, x, v, spec, delta_split, tol)),
            ("band", _band_term(f, x, v, spec, delta_split, tol)),
            ("large", _large_jump_term(f, x, v, spec, tol)),
        ):
            terms[name] += value
            terms["error"] += err
    logger.debug("alpha generator at %s: %s", x, terms)
    return terms


def apply_alpha_generator(
    coeffs: CoefficientField,
    noise: CylindricalNoiseSpec,
    f: TestFunction,
    x,
    delta_split: float = DEFAULT_DELTA_SPLIT,
    tol: float = DEFAULT_TOL,
) -> float:
    """
    L^{alpha,beta} f(x) = b.grad f + sum_i int [f(x + sigma_i z) - f(x)
    - sigma_i z . grad f 1_{|z|<=1}] nu_i(dz).

    Raises:
        PreconditionError: f is not bounded
        QuadratureAccuracyError: an integral missed the tolerance
    """
    t = alpha_generator_terms(coeffs, noise, f, x, delta_split, tol)
    return t["drift"] + t["small"] + t["band"] + t["large"]


def generator_gap(
    coeffs: CoefficientField,
    noise: CylindricalNoiseSpec,
    f: TestFunction,
    x,
    delta_split: float = DEFAULT_DELTA_SPLIT,
    tol: float = DEFAULT_TOL,
) -> GeneratorEvalReport:
    """
    L^{alpha,beta} f(x) - L f(x) with the per-term split and quadrature bound.

    Args:
        coeffs: Drift and diffusion shared by both generators
        noise: Cylindrical stable noise
        f: Bounded test function
        x: Evaluation point
        delta_split: Small-jump radius, in (0, 1]
        tol: Quadrature tolerance

    Returns:
        GeneratorEvalReport; gap = alpha_value - limit_value
    """
    t = alpha_generator_terms(coeffs, noise, f, x, delta_split, tol)
    alpha_value = t["drift"] + t["small"] + t["band"] + t["large"]
    limit_value = apply_limit_generator(coeffs, f, x)
    return GeneratorEvalReport(
        alpha_value=alpha_value,
        limit_value=limit_value,
        gap=alpha_value - limit_value,
        quadrature_error_bound=t["error"],
        delta_split=delta_split,
        drift_term=t["drift"],
        small_jump_term=t["small"],
        band_term=t["band"],
        large_jump_term=t["large"],
    )


def kolmogorov_residual(
    coeffs: CoefficientField,
    f: TestFunction,
    t: float,
    x,
    grid: TimeGrid,
    n_paths: int,
    key: RngStreamKey,
    fd_step: float = 0.05,
) -> ResidualEstimate:
    """
    Monte Carlo check of (d/dt + L) u = 0 for u(t, x) = E[f(X_T) | X_t = x].

    Every stencil point reuses the same stream key, so time shifts rescale and
    space shifts translate one common set of Gaussian draws; the residual is
    then an average of per-path residuals. The solver takes grid.n_steps
    steps over [t, T] for every stencil point.

    Args:
        coeffs: Coefficients of the limit SDE
        f: Bounded terminal function
        t: Residual time in [0, T)
        x: Residual point
        grid: Horizon T and step count
        n_paths: Paths per stencil point
        key: Stream shared by every stencil point
        fd_step: Finite-difference step in t and x

    Returns:
        ResidualEstimate; inconclusive when the standard error exceeds the term scale
    """
    T = grid.horizon_T
    if not (0.0 <= t < T):
        raise ParameterDomainError("t", t, f"[0, {T})")
    if not f.bounded:
        raise PreconditionError("the Monte Carlo surrogate needs a bounded test function")
    if fd_step <= 0:
        raise ParameterDomainError("fd_step", fd_step, "(0, inf)")
    d = coeffs.dimension
    x = _as_point(x, d)
    tau = T - t
    dt_step = min(fd_step, tau / 2.0)
    dx = fd_step

    def values(horizon: float, point: np.ndarray) -> np.ndarray:
        sub = TimeGrid(horizon_T=horizon, n_steps=grid.n_steps)
        ensemble = simulate_diffusion_ensemble(coeffs, sub, point, key, n_paths)
        return f.eval(ensemble.terminal)

    centre = values(tau, x)
    # u(t + dt) has horizon tau - dt
    time_derivative = (values(tau - dt_step, x) - values(tau + dt_step, x)) / (2.0 * dt_step)

    eye = np.eye(d) * dx
    grad = np.empty((n_paths, d))
    hess = np.empty((n_paths, d, d))
    for j in range(d):
        up, down = values(tau, x + eye[j]), values(tau, x - eye[j])
        grad[:, j] = (up - down) / (2.0 * dx)
        hess[:, j, j] = (up - 2.0 * centre + down) / (dx * dx)
        for k in range(j + 1, d):
            mixed = (
                values(tau, x + eye[j] + eye[k])
                - values(tau, x + eye[j] - eye[k])
                - values(tau, x - eye[j] + eye[k])
                + values(tau, x - eye[j] - eye[k])
            ) / (4.0 * dx * dx)
            hess[:, j, k] = hess[:, k, j] = mixed

    generator = limit_generator_terms(coeffs.drift_at(x)[0], coeffs.diffusion_at(x)[0], grad, hess)
    per_path = time_derivative + generator
    residual = float(np.mean(per_path))
    std_error = float(np.std(per_path, ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else math.inf
    time_mean = float(np.mean(time_derivative))
    generator_mean = float(np.mean(generator))
    scale = abs(time_mean) + abs(generator_mean)
    inconclusive = std_error > scale
    if inconclusive:
        logger.warning(
            "kolmogorov residual inconclusive: std error %.3g exceeds term scale %.3g", std_error, scale
        )
    return ResidualEstimate(
        residual=residual,
        std_error=std_error,
        u_value=float(np.mean(centre)),
        time_derivative=time_mean,
        generator_value=generator_mean,
        n_paths=n_paths,
        inconclusive=inconclusive,
    )


def cosine_value_function(preset: CoefficientPreset, frequency: float, tau: float, x: float) -> Optional[float]:
    """
    Closed-form u = E[cos(k X_T) | X_t = x] of the one-dimensional limit SDE.

    pure_noise gives the heat kernel, exp(-k^2 tau) cos(k x). ou_type gives the
    Mehler kernel: X_T is Gaussian with mean x e^{-tau} and variance 1 - e^{-2 tau}.

    Args:
        preset: Coefficient preset of the SDE
        frequency: Wave number k of the test function
        tau: Remaining horizon T - t
        x: Starting point

    Returns:
        The value, or None when the preset has no closed form
    """
    preset = CoefficientPreset(preset)
    if tau < 0:
        raise ParameterDomainError("tau", tau, "[0, inf)")
    k = float(frequency)
    if preset is CoefficientPreset.PURE_NOISE:
        return math.exp(-k * k * tau) * math.cos(k * x)
    if preset is CoefficientPreset.OU_TYPE:
        decay = math.exp(-tau)
        return math.cos(k * x * decay) * math.exp(-k * k * (1.0 - decay * decay) / 2.0)
    return None
