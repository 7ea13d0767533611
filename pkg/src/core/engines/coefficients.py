"""
Named coefficient presets and the test-function basis.

All callables are vectorised over a leading sample axis: points have shape (m, d).
"""
import math
from typing import Sequence

import numpy as np

from ..exceptions import ParameterDomainError
from ..models.schemas import (
    CoefficientField,
    CoefficientPreset,
    PlaneWave,
    TestFunction,
    TestFunctionKind,
)


def _identity_diffusion(d: int):
    eye = np.eye(d)

    def diffusion(x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(eye, (x.shape[0], d, d)).copy()

    return diffusion


def pure_noise(dimension: int = 1) -> CoefficientField:
    """b = 0, sigma = I"""
    return CoefficientField(
        dimension=dimension,
        drift=np.zeros_like,
        diffusion=_identity_diffusion(dimension),
        growth_exponent_r=0.0,
        lipschitz_sigma=None,
        bounded=True,
        bound=math.sqrt(dimension),
        name=CoefficientPreset.PURE_NOISE.value,
    )


def ou_type(dimension: int = 1) -> CoefficientField:
    """b(x) = -x, sigma = I"""
    return CoefficientField(
        dimension=dimension,
        drift=np.negative,
        diffusion=_identity_diffusion(dimension),
        growth_exponent_r=1.0,
        bounded=False,
        name=CoefficientPreset.OU_TYPE.value,
    )


def bounded_smooth(dimension: int = 1) -> CoefficientField:
    """b(x) = -tanh(x), sigma(x) = diag(1 + cos(x_i)/2)"""

    def diffusion(x: np.ndarray) -> np.ndarray:
        out = np.zeros((x.shape[0], dimension, dimension))
        idx = np.arange(dimension)
        out[:, idx, idx] = 1.0 + 0.5 * np.cos(x)
        return out

    return CoefficientField(
        dimension=dimension,
        drift=lambda x: -np.tanh(x),
        diffusion=diffusion,
        growth_exponent_r=0.0,
        lipschitz_sigma=0.5,
        bounded=True,
        bound=1.5 * math.sqrt(dimension),
        name=CoefficientPreset.BOUNDED_SMOOTH.value,
    )


def polynomial(dimension: int = 1) -> CoefficientField:
    """b(x) = x - |x|^2 x (one-sided Lipschitz, cubic growth), sigma = I"""

    def drift(x: np.ndarray) -> np.ndarray:
        return x - np.sum(x * x, axis=-1, keepdims=True) * x

    return CoefficientField(
        dimension=dimension,
        drift=drift,
        diffusion=_identity_diffusion(dimension),
        growth_exponent_r=3.0,
        bounded=False,
        name=CoefficientPreset.POLYNOMIAL.value,
    )


PRESETS = {
    CoefficientPreset.PURE_NOISE: pure_noise,
    CoefficientPreset.OU_TYPE: ou_type,
    CoefficientPreset.BOUNDED_SMOOTH: bounded_smooth,
    CoefficientPreset.POLYNOMIAL: polynomial,
}


def build_coefficients(preset: CoefficientPreset, dimension: int = 1) -> CoefficientField:
    return PRESETS[CoefficientPreset(preset)](dimension)


def constant_coefficients(dimension: int, drift: Sequence[float], sigma) -> CoefficientField:
    """Constant b and sigma"""
    b = np.asarray(drift, dtype=float).reshape(dimension)
    s = np.asarray(sigma, dtype=float).reshape(dimension, dimension)
    return CoefficientField(
        dimension=dimension,
        drift=lambda x: np.broadcast_to(b, x.shape).copy(),
        diffusion=lambda x: np.broadcast_to(s, (x.shape[0], dimension, dimension)).copy(),
        bounded=True,
        bound=max(float(np.linalg.norm(b)), float(np.linalg.norm(s)), 1e-300),
        name="constant",
    )


def check_bounded(coeffs: CoefficientField, points: np.ndarray) -> bool:
    """Declared bound holds for |b| and the Hilbert-Schmidt norm of sigma at the sample points"""
    if not coeffs.bounded or coeffs.bound is None:
        return False
    points = np.atleast_2d(points)
    b = np.linalg.norm(coeffs.drift_at(points), axis=-1)
    hs = np.sqrt(np.sum(coeffs.diffusion_at(points) ** 2, axis=(-2, -1)))
    return bool(np.all(b <= coeffs.bound + 1e-12) and np.all(hs <= coeffs.bound + 1e-12))


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

def plane_wave(wave_vector: Sequence[float], phase: float = 0.0, amplitude: float = 1.0) -> TestFunction:
    """amplitude * cos(xi . x + phase)"""
    xi = np.asarray(wave_vector, dtype=float)
    outer = np.outer(xi, xi)

    def theta(x):
        return np.atleast_2d(x) @ xi + phase

    return TestFunction(
        dimension=xi.size,
        eval=lambda x: amplitude * np.cos(theta(x)),
        gradient=lambda x: -amplitude * np.sin(theta(x))[:, None] * xi,
        hessian=lambda x: -amplitude * np.cos(theta(x))[:, None, None] * outer,
        bounded=True,
        sup_norm=abs(amplitude),
        wave=PlaneWave(amplitude=amplitude, wave_vector=tuple(xi), phase=phase),
        name=f"cos({'/'.join(f'{v:g}' for v in xi)}.x{phase:+g})",
    )


def cosine(frequency: float = 1.0, dimension: int = 1) -> TestFunction:
    """cos(frequency * x_1)"""
    return plane_wave((frequency,) + (0.0,) * (dimension - 1))


def sine(frequency: float = 1.0, dimension: int = 1) -> TestFunction:
    """sin(frequency * x_1)"""
    return plane_wave((frequency,) + (0.0,) * (dimension - 1), phase=-math.pi / 2.0)


def gaussian_bump(center: Sequence[float], width: float = 1.0, amplitude: float = 1.0) -> TestFunction:
    """amplitude * exp(-|x - center|^2 / (2 width^2))"""
    c = np.asarray(center, dtype=float)
    d = c.size
    w2 = width * width
    eye = np.eye(d)

    def value(x):
        y = np.atleast_2d(x) - c
        return amplitude * np.exp(-np.sum(y * y, axis=-1) / (2.0 * w2))

    def gradient(x):
        y = np.atleast_2d(x) - c
        return -value(x)[:, None] * y / w2

    def hessian(x):
        y = np.atleast_2d(x) - c
        return value(x)[:, None, None] * (y[:, :, None] * y[:, None, :] / (w2 * w2) - eye / w2)

    return TestFunction(
        dimension=d,
        eval=value,
        gradient=gradient,
        hessian=hessian,
        bounded=True,
        sup_norm=abs(amplitude),
        name=f"bump(w={width:g})",
    )


def constant(value: float, dimension: int = 1) -> TestFunction:
    return TestFunction(
        dimension=dimension,
        eval=lambda x: np.full(np.atleast_2d(x).shape[0], float(value)),
        gradient=lambda x: np.zeros(np.atleast_2d(x).shape),
        hessian=lambda x: np.zeros((np.atleast_2d(x).shape[0], dimension, dimension)),
        bounded=True,
        sup_norm=abs(value),
        name="constant",
    )


def linear(coefficients: Sequence[float]) -> TestFunction:
    """a . x (unbounded; valid for the limit generator only)"""
    a = np.asarray(coefficients, dtype=float)
    d = a.size
    return TestFunction(
        dimension=d,
        eval=lambda x: np.atleast_2d(x) @ a,
        gradient=lambda x: np.broadcast_to(a, np.atleast_2d(x).shape).copy(),
        hessian=lambda x: np.zeros((np.atleast_2d(x).shape[0], d, d)),
        bounded=False,
        name="linear",
    )


def build_test_function(kind: TestFunctionKind, dimension: int = 1, frequency: float = 1.0) -> TestFunction:
    kind = TestFunctionKind(kind)
    if kind is TestFunctionKind.COS:
        return cosine(frequency, dimension)
    return gaussian_bump(np.zeros(dimension), width=1.0 / frequency)


def derivative_mismatch(f: TestFunction, points: np.ndarray) -> float:
    """
    Largest relative mismatch between the analytic gradient/Hessian of f and
    central differences with step 1e-5 (1 + |x|).
    """
    points = np.atleast_2d(points)
    if points.shape[1] != f.dimension:
        raise ParameterDomainError("points", points.shape, f"(m, {f.dimension})")
    worst = 0.0
    for x in points:
        step = 1e-5 * (1.0 + np.linalg.norm(x))
        grad = f.gradient(x)[0]
        hess = f.hessian(x)[0]
        for j in range(f.dimension):
            e = np.zeros(f.dimension)
            e[j] = step
            fd_grad = (f.eval(x + e)[0] - f.eval(x - e)[0]) / (2.0 * step)
            fd_hess = (f.gradient(x + e)[0] - f.gradient(x - e)[0]) / (2.0 * step)
            scale_g = max(1.0, abs(grad[j]))
            scale_h = max(1.0, float(np.max(np.abs(hess[:, j]))))
            worst = max(worst, abs(fd_grad - grad[j]) / scale_g)
            worst = max(worst, float(np.max(np.abs(fd_hess - hess[:, j]))) / scale_h)
    return worst
