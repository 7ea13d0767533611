"""
Test suite for the Levy measure calculus.
"""
import math

import numpy as np
import pytest
from scipy import integrate, special

from src.core.engines import levy_measure
from src.core.exceptions import DivergentIntegralError, ParameterDomainError
from src.core.models.schemas import ALPHA_MAX, Region

ALPHA_GRID = (1.51, 1.6, 1.75, 1.9, 1.99, 1.999)


def direct_exponent(spec, xi: float) -> complex:
    """psi(xi) by quadrature of (e^{i xi z} - 1 - i xi z 1{|z| <= 1}) against nu"""
    a = spec.alpha

    def cos_inner(z):
        # (cos(xi z) - 1) / z^2 without cancellation
        return -2.0 * math.sin(xi * z / 2.0) ** 2 / (z * z) if z > 0 else -xi * xi / 2.0

    def sin_inner(z):
        # (sin(xi z) - xi z) / z^3
        if z < 1e-3:
            return -xi ** 3 / 6.0 + xi ** 5 * z * z / 120.0
        return (math.sin(xi * z) - xi * z) / z ** 3

    tail = lambda z: z ** (-1.0 - a)  # noqa: E731
    cos_near, _ = integrate.quad(cos_inner, 0.0, 1.0, weight="alg", wvar=(1.0 - a, 0.0))
    sin_near, _ = integrate.quad(sin_inner, 0.0, 1.0, weight="alg", wvar=(2.0 - a, 0.0))
    cos_far, _ = integrate.quad(tail, 1.0, np.inf, weight="cos", wvar=abs(xi))
    sin_far, _ = integrate.quad(tail, 1.0, np.inf, weight="sin", wvar=abs(xi))
    sin_far *= math.copysign(1.0, xi)
    real = spec.kappa * (cos_near + cos_far - 1.0 / a)
    imag = (spec.c_plus - spec.c_minus) * (sin_near + sin_far)
    return complex(real, imag)


class TestLevyMeasure:
    """Constants and closed-form moments"""

    def test_kappa_matches_defining_formula(self):
        """Test the reflection form of kappa against its defining formula"""
        for alpha in (1.2, 1.5, 1.8):
            direct = alpha * (1 - alpha) / (special.gamma(2 - alpha) * math.cos(math.pi * alpha / 2))
            assert levy_measure.stable_kappa(alpha) == pytest.approx(direct, rel=1e-12)

    def test_kappa_vanishes_linearly(self):
        """Test that kappa / (2 - alpha) stays bounded and tends to 2"""
        ratios = [levy_measure.stable_kappa(a) / (2.0 - a) for a in ALPHA_GRID]
        assert all(0.0 < r <= 2.1 for r in ratios)
        assert ratios[-1] == pytest.approx(2.0, rel=1e-2)
        assert levy_measure.stable_kappa(ALPHA_MAX) / (2.0 - ALPHA_MAX) == pytest.approx(2.0, rel=1e-5)

    def test_skewness_split(self):
        """Test that the two sides sum to kappa in the beta proportion"""
        spec = levy_measure.make_measure(1.7, 0.4)
        assert spec.c_plus + spec.c_minus == pytest.approx(spec.kappa, rel=1e-14)
        assert spec.c_plus / spec.kappa == pytest.approx(0.7)

        one_sided = levy_measure.make_measure(1.7, 1.0)
        assert one_sided.c_minus == 0.0

    def test_alpha_outside_open_interval_rejected(self):
        """Test that alpha outside (1, 2) names the alpha field"""
        for alpha in (1.0, 2.0, 0.5, 2.5):
            with pytest.raises(ParameterDomainError) as exc:
                levy_measure.make_measure(alpha, 0.0)
            assert exc.value.field == "alpha"

    def test_beta_outside_range_rejected(self):
        """Test that |beta| > 1 is rejected"""
        with pytest.raises(ParameterDomainError):
            levy_measure.make_measure(1.5, 1.5)

    def test_second_moment_tends_to_two(self):
        """Test the unit-window second moment near alpha = 2"""
        near = levy_measure.make_measure(1.999, 0.0)
        closer = levy_measure.make_measure(1.99, 0.0)
        assert abs(levy_measure.truncated_second_moment(near, 1.0) - 2.0) <= 0.005
        assert abs(levy_measure.truncated_second_moment(closer, 1.0) - 2.0) <= 0.05

    @pytest.mark.parametrize("alpha", [1.3, 1.75, 1.99])
    def test_second_moment_scaling(self, alpha):
        """Test that delta^{alpha-2} times the truncated second moment is constant in delta"""
        spec = levy_measure.make_measure(alpha, 0.2)
        unit = levy_measure.truncated_second_moment(spec, 1.0)
        for delta in (0.01, 0.3, 0.9):
            scaled = delta ** (alpha - 2.0) * levy_measure.truncated_second_moment(spec, delta)
            assert scaled == pytest.approx(unit, rel=1e-12)

    def test_moments_independent_of_beta(self):
        """Test that the unsigned moments do not depend on beta"""
        for alpha in (1.4, 1.9):
            specs = [levy_measure.make_measure(alpha, b) for b in (-1.0, 0.0, 0.6, 1.0)]
            seconds = {levy_measure.truncated_second_moment(s, 0.4) for s in specs}
            tails = {levy_measure.tail_moment(s, 0.4, 0.5) for s in specs}
            assert max(seconds) == pytest.approx(min(seconds), rel=1e-14)
            assert max(tails) == pytest.approx(min(tails), rel=1e-14)

    def test_tail_mean_odd_in_beta(self):
        """Test that flipping beta flips the sign of the tail mean"""
        for beta in (0.3, 0.8, 1.0):
            plus = levy_measure.tail_mean(levy_measure.make_measure(1.6, beta), 0.5)
            minus = levy_measure.tail_mean(levy_measure.make_measure(1.6, -beta), 0.5)
            assert plus == pytest.approx(-minus, rel=1e-14)
            assert plus > 0.0

    def test_tail_moment_vanishes_near_two(self):
        """Test that the first tail moment is small near alpha = 2"""
        spec = levy_measure.make_measure(1.99, 0.0)
        assert levy_measure.tail_moment(spec, 1.0, 1.0) <= 0.05

    def test_tail_moment_diverges_at_alpha(self):
        """Test that orders at or above alpha are rejected"""
        spec = levy_measure.make_measure(1.6, 0.0)
        with pytest.raises(DivergentIntegralError):
            levy_measure.tail_moment(spec, 1.0, 1.6)
        with pytest.raises(ParameterDomainError):
            levy_measure.tail_moment(spec, 1.0, 1.9)

    def test_symmetric_tail_mean_is_zero(self):
        """Test that the symmetric measure has zero tail mean"""
        spec = levy_measure.make_measure(1.5, 0.0)
        assert levy_measure.tail_mean(spec, 0.3) == 0.0

    def test_nonpositive_delta_rejected(self):
        """Test that delta = 0 is rejected"""
        spec = levy_measure.make_measure(1.5, 0.0)
        with pytest.raises(ParameterDomainError):
            levy_measure.truncated_second_moment(spec, 0.0)


class TestQuadratureMoment:
    """Quadrature oracle against the closed forms"""

    @pytest.mark.parametrize("alpha", [1.51, 1.6, 1.75, 1.9, 1.99])
    @pytest.mark.parametrize("delta", [0.1, 0.5, 1.0])
    def test_closed_forms(self, alpha, delta):
        """Test quadrature against every closed-form moment"""
        spec = levy_measure.make_measure(alpha, 0.3)
        value, _ = levy_measure.quadrature_moment(spec, delta, 2.0, Region.INNER)
        exact = levy_measure.truncated_second_moment(spec, delta)
        assert value == pytest.approx(exact, rel=1e-8)

        for vartheta in (0.0, 1.0, alpha - 0.01):
            value, _ = levy_measure.quadrature_moment(spec, delta, vartheta, Region.OUTER)
            exact = levy_measure.tail_moment(spec, delta, vartheta)
            assert value == pytest.approx(exact, rel=1e-8)

    def test_signed_first_moment_is_tail_mean(self):
        """Test the signed outer moment against the tail mean"""
        spec = levy_measure.make_measure(1.6, -0.5)
        value, _ = levy_measure.quadrature_moment(spec, 0.5, 1.0, Region.OUTER, signed=True)
        assert value == pytest.approx(levy_measure.tail_mean(spec, 0.5), rel=1e-8)

    def test_non_integrable_powers(self):
        """Test that non-integrable powers raise DivergentIntegralError"""
        spec = levy_measure.make_measure(1.6, 0.0)
        with pytest.raises(DivergentIntegralError):
            levy_measure.quadrature_moment(spec, 1.0, 1.5, Region.INNER)
        with pytest.raises(DivergentIntegralError):
            levy_measure.quadrature_moment(spec, 1.0, 1.7, Region.OUTER)


class TestCharacteristicExponent:
    """Symbol of the unit-scale process"""

    def test_zero_frequency(self):
        """Test psi(0) = 0"""
        spec = levy_measure.make_measure(1.7, 0.5)
        assert levy_measure.characteristic_exponent(spec, 0.0) == 0j

    def test_real_part(self):
        """Test Re psi = -|xi|^alpha"""
        spec = levy_measure.make_measure(1.7, 0.5)
        psi = levy_measure.characteristic_exponent(spec, -2.0)
        assert psi.real == pytest.approx(-(2.0 ** 1.7))

    def test_symmetric_is_real(self):
        """Test that beta = 0 gives a real symbol"""
        spec = levy_measure.make_measure(1.4, 0.0)
        assert levy_measure.characteristic_exponent(spec, 1.3).imag == 0.0

    @pytest.mark.parametrize("beta", [-0.7, 0.0, 0.4, 1.0])
    def test_conjugate_symmetry(self, beta):
        """Test psi(-xi) = conj psi(xi)"""
        spec = levy_measure.make_measure(1.65, beta)
        for xi in (0.3, 1.0, 4.5):
            forward = levy_measure.characteristic_exponent(spec, xi)
            backward = levy_measure.characteristic_exponent(spec, -xi)
            assert backward.real == pytest.approx(forward.real, rel=1e-14)
            assert backward.imag == pytest.approx(-forward.imag, rel=1e-14, abs=1e-15)

    @pytest.mark.parametrize("alpha,beta,xi", [(1.5, 0.5, 1.3), (1.8, -0.9, 0.7), (1.3, 1.0, -2.0)])
    def test_matches_direct_quadrature(self, alpha, beta, xi):
        """Test the closed-form symbol against the Levy-Khintchine integral"""
        spec = levy_measure.make_measure(alpha, beta)
        psi = levy_measure.characteristic_exponent(spec, xi)
        direct = direct_exponent(spec, xi)
        assert psi.real == pytest.approx(direct.real, rel=1e-6)
        assert psi.imag == pytest.approx(direct.imag, rel=1e-6, abs=1e-9)

    def test_gaussian_limit(self):
        """Test that psi approaches -xi^2 as alpha -> 2 for every beta"""
        for beta in (0.0, 0.5, -1.0):
            deviations = [
                abs(levy_measure.characteristic_exponent(levy_measure.make_measure(a, beta), 1.3) + 1.69)
                for a in ALPHA_GRID
            ]
            assert all(b < a for a, b in zip(deviations, deviations[1:]))
            assert deviations[-1] <= 0.01

    def test_density_weights(self):
        """Test the one-sided density for beta = 1"""
        spec = levy_measure.make_measure(1.5, 1.0)
        values = levy_measure.density(spec, [-2.0, 2.0])
        assert values[0] == 0.0
        assert values[1] == pytest.approx(spec.kappa * 2.0 ** -2.5)
