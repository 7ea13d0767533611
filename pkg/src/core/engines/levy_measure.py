"""
Levy Measure Engine - The power-law measure nu^{alpha,beta}, its closed-form
moments and an independent quadrature oracle.

The density is c_plus * z^{-1-alpha} on z > 0 and c_minus * |z|^{-1-alpha}
on z < 0, with c_plus + c_minus = kappa.
"""
import logging
import math
from typing import Tuple

import numpy as np
from scipy import integrate, special

from ..exceptions import DivergentIntegralError, ParameterDomainError, QuadratureAccuracyError
from ..models.schemas import (
    CylindricalNoiseSpec,
    LevyMeasureSpec,
    Region,
    check_alpha,
    check_beta,
    check_positive,
)

logger = logging.getLogger(__name__)

# truncation threshold for the analytic remainders of the oracle
REMAINDER_CUTOFF = 1e-12
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 500


def stable_kappa(alpha: float) -> float:
    """
    K_alpha = alpha(1-alpha) / (Gamma(2-alpha) cos(pi alpha/2)).

    Evaluated through the reflection formula as
    (2/pi) Gamma(1+alpha) sin(pi alpha/2), which equals
    -1/(Gamma(-alpha) cos(pi alpha/2)) and has no cancellation near alpha = 2.
    """
    alpha = check_alpha(alpha)
    return 2.0 / math.pi * special.gamma(1.0 + alpha) * math.sin(math.pi * alpha / 2.0)


def make_measure(alpha: float, beta: float) -> LevyMeasureSpec:
    """
    Build nu^{alpha,beta} with its derived constants.

    Args:
        alpha: Stability index in (1, 2)
        beta: Skewness in [-1, 1]

    Returns:
        LevyMeasureSpec holding kappa and the one-sided weights c_plus, c_minus

    Raises:
        ParameterDomainError: alpha or beta out of range
    """
    alpha = check_alpha(alpha)
    beta = check_beta(beta)
    kappa = stable_kappa(alpha)
    return LevyMeasureSpec(
        alpha=alpha,
        beta=beta,
        kappa=kappa,
        c_plus=kappa * (1.0 + beta) / 2.0,
        c_minus=kappa * (1.0 - beta) / 2.0,
    )


def make_cylindrical_noise(alpha: float, betas) -> CylindricalNoiseSpec:
    """d independent components sharing alpha; component i has skewness betas[i]"""
    betas = tuple(check_beta(b, field=f"betas[{i}]") for i, b in enumerate(betas))
    if not betas:
        raise ParameterDomainError("betas", betas, "length >= 1")
    return CylindricalNoiseSpec(
        alpha=check_alpha(alpha),
        betas=betas,
        components=tuple(make_measure(alpha, b) for b in betas),
    )


def truncated_second_moment(spec: LevyMeasureSpec, delta: float) -> float:
    """Integral of z^2 over |z| <= delta: K delta^{2-alpha} / (2-alpha)."""
    delta = check_positive(delta, "delta")
    a = spec.alpha
    return spec.kappa * delta ** (2.0 - a) / (2.0 - a)


def tail_moment(spec: LevyMeasureSpec, delta: float, vartheta: float) -> float:
    """
    Integral of |z|^vartheta over |z| > delta: K delta^{vartheta-alpha} / (alpha-vartheta).

    Raises:
        DivergentIntegralError: vartheta >= alpha
    """
    delta = check_positive(delta, "delta")
    a = spec.alpha
    if vartheta >= a:
        raise DivergentIntegralError(
            "vartheta", vartheta, f"(-inf, {a})",
            message=f"tail moment of order {vartheta} diverges for alpha={a}",
        )
    return spec.kappa * delta ** (vartheta - a) / (a - vartheta)


def tail_mean(spec: LevyMeasureSpec, delta: float) -> float:
    """Signed integral of z over |z| > delta: K beta delta^{1-alpha} / (alpha-1)."""
    delta = check_positive(delta, "delta")
    a = spec.alpha
    return (spec.c_plus - spec.c_minus) * delta ** (1.0 - a) / (a - 1.0)


def jump_intensity(spec: LevyMeasureSpec, delta: float) -> float:
    """Total mass of jumps larger than delta in absolute value"""
    return tail_moment(spec, delta, 0.0)


def _power_integral(exponent: float, lower_u: float, upper_u: float) -> Tuple[float, float]:
    """Integral of e^{exponent u} over [lower_u, upper_u] by adaptive Gauss-Kronrod."""
    value, abserr = integrate.quad(
        lambda u: math.exp(exponent * u),
        lower_u, upper_u,
        epsabs=0.0, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
    )
    return value, abserr


def quadrature_moment(
    spec: LevyMeasureSpec,
    delta: float,
    power: float,
    region: Region,
    signed: bool = False,
    tolerance: float = 1e-9,
) -> Tuple[float, float]:
    """
    Numerical integral of |z|^power (or z|z|^{power-1} when signed) against nu.

    Each half-line is integrated after z = e^u, which turns the power-law
    singularity into an exponential. The unbounded end is truncated where the
    analytic remainder drops below 1e-12 and the remainder is added back.

    Args:
        spec: The measure
        delta: Window radius
        power: Exponent of |z|
        region: INNER for |z| <= delta, OUTER for |z| > delta
        signed: Integrate z|z|^{power-1} instead of |z|^power
        tolerance: Relative bound on the reported error

    Returns:
        (value, error_bound)
    """
    delta = check_positive(delta, "delta")
    region = Region(region)
    a = spec.alpha
    exponent = power - a  # integrand after substitution is e^{exponent u}
    log_delta = math.log(delta)

    if region is Region.INNER:
        if exponent <= 0:
            raise DivergentIntegralError(
                "power", power, f"({a}, inf)",
                message=f"|z|^{power} is not integrable near 0 for alpha={a}",
            )
        # remainder below z_min: z_min^{exponent} / exponent per unit density
        z_min_exp = min(log_delta, math.log(REMAINDER_CUTOFF * exponent) / exponent)
        unit, abserr = _power_integral(exponent, z_min_exp, log_delta)
        remainder = math.exp(exponent * z_min_exp) / exponent
    else:
        if exponent >= 0:
            raise DivergentIntegralError(
                "power", power, f"(-inf, {a})",
                message=f"|z|^{power} is not integrable at infinity for alpha={a}",
            )
        z_max_exp = max(log_delta, math.log(REMAINDER_CUTOFF * -exponent) / exponent)
        unit, abserr = _power_integral(exponent, log_delta, z_max_exp)
        remainder = math.exp(exponent * z_max_exp) / -exponent

    weight = (spec.c_plus - spec.c_minus) if signed else spec.kappa
    value = weight * (unit + remainder)
    error = abs(weight) * abserr
    logger.debug(
        "quadrature_moment alpha=%.6g delta=%.3g power=%.3g region=%s -> %.12g (+/- %.2g)",
        a, delta, power, region.value, value, error,
    )
    if error > tolerance * max(1.0, abs(value)):
        raise QuadratureAccuracyError(value, error, tolerance, what="quadrature_moment")
    return value, error


def density(spec: LevyMeasureSpec, z: np.ndarray) -> np.ndarray:
    """Levy density of nu at z != 0"""
    z = np.asarray(z, dtype=float)
    absz = np.abs(z)
    weight = np.where(z > 0, spec.c_plus, spec.c_minus)
    with np.errstate(divide="ignore"):
        return np.where(absz > 0, weight * absz ** (-1.0 - spec.alpha), np.inf)


def characteristic_exponent(spec: LevyMeasureSpec, xi: float) -> complex:
    """
    psi(xi) with E exp(i xi L_t) = exp(t psi(xi)), compensation on |z| <= 1 only.

    psi(xi) = -|xi|^alpha (1 - i beta sign(xi) tan(pi alpha/2)) + i xi m1,
    m1 = tail_mean(spec, 1).

    Args:
        spec: The measure
        xi: Frequency

    Returns:
        psi(xi); psi(-xi) is its complex conjugate
    """
    xi = float(xi)
    if xi == 0.0:
        return 0j
    a = spec.alpha
    skew = spec.beta * math.copysign(1.0, xi) * math.tan(math.pi * a / 2.0)
    m1 = tail_mean(spec, 1.0)
    return complex(-abs(xi) ** a, abs(xi) ** a * skew + xi * m1)
