"""
Test suite for the generator calculus.
"""
import math

import numpy as np
import pytest

from src.core.engines import coefficients, levy_measure
from src.core.engines.generator_calculus import (
    apply_alpha_generator,
    apply_limit_generator,
    cosine_value_function,
    generator_gap,
    kolmogorov_residual,
    naive_remainder,
    taylor_remainder,
)
from src.core.engines.weak_error import fit_rate
from src.core.exceptions import ParameterDomainError, PreconditionError
from src.core.models.schemas import CoefficientPreset, RngStreamKey, TimeGrid


def plane_wave_symbol(spec, k, theta):
    """Re[psi(k) e^{i theta}] for the plane wave cos(theta)"""
    psi = levy_measure.characteristic_exponent(spec, k)
    return psi.real * math.cos(theta) - psi.imag * math.sin(theta)


class TestLimitGenerator:
    """Second-order generator"""

    def test_heat_on_cosine(self):
        """Test that the pure-noise generator maps cos to -cos"""
        f = coefficients.cosine(1.0)
        assert apply_limit_generator(coefficients.pure_noise(1), f, [0.0]) == pytest.approx(-1.0)

    def test_ou_on_linear(self):
        """Test the drift term on a linear function"""
        f = coefficients.linear([2.0])
        # b f' = -x * 2, no curvature
        assert apply_limit_generator(coefficients.ou_type(1), f, [1.5]) == pytest.approx(-3.0)

    def test_trace_term_in_two_dimensions(self):
        """Test the trace term of a two-dimensional plane wave"""
        f = coefficients.plane_wave([1.0, 2.0])
        value = apply_limit_generator(coefficients.pure_noise(2), f, [0.0, 0.0])
        assert value == pytest.approx(-5.0)


class TestAlphaGenerator:
    """Nonlocal generator by quadrature"""

    def setup_method(self):
        self.pure = coefficients.pure_noise(1)

    @pytest.mark.parametrize("alpha,beta,k,x", [(1.7, 0.0, 1.3, 0.4), (1.6, 0.5, 0.8, -0.2), (1.9, -0.9, 2.0, 1.0)])
    def test_plane_wave_symbol(self, alpha, beta, k, x):
        """Test the generator on a plane wave against the characteristic exponent"""
        noise = levy_measure.make_cylindrical_noise(alpha, (beta,))
        f = coefficients.cosine(k)
        value = apply_alpha_generator(self.pure, noise, f, [x])
        expected = plane_wave_symbol(noise.components[0], k, k * x)
        assert value == pytest.approx(expected, abs=1e-7)

    def test_unit_frequency_gap_vanishes(self):
        """Test that cos(x) has zero gap in the symmetric case"""
        noise = levy_measure.make_cylindrical_noise(1.8, (0.0,))
        report = generator_gap(self.pure, noise, coefficients.cosine(1.0), [0.3])
        assert abs(report.gap) < 1e-7

    def test_gap_closed_form(self):
        """Test the gap at frequency 2 against 4 - 2^alpha"""
        for alpha in (1.9, 1.99):
            noise = levy_measure.make_cylindrical_noise(alpha, (0.0,))
            report = generator_gap(self.pure, noise, coefficients.cosine(2.0), [0.0])
            assert report.gap == pytest.approx(4.0 - 2.0 ** alpha, abs=1e-7)
            assert report.quadrature_error_bound <= 1e-8

    def test_gap_independent_of_split(self):
        """Test that the small/large jump split does not move the gap"""
        noise = levy_measure.make_cylindrical_noise(1.75, (0.3,))
        f = coefficients.gaussian_bump([0.2], width=0.7)
        coeffs = coefficients.bounded_smooth(1)
        gaps = [generator_gap(coeffs, noise, f, [0.1], delta_split=d).gap for d in (0.1, 0.5, 1.0)]
        assert gaps[0] == pytest.approx(gaps[1], abs=1e-8)
        assert gaps[1] == pytest.approx(gaps[2], abs=1e-8)

    def test_term_split_adds_up(self):
        """Test that the four terms sum to the generator value"""
        noise = levy_measure.make_cylindrical_noise(1.6, (0.5,))
        report = generator_gap(coefficients.ou_type(1), noise, coefficients.cosine(1.0), [0.7])
        total = report.drift_term + report.small_jump_term + report.band_term + report.large_jump_term
        assert total == pytest.approx(report.alpha_value, abs=1e-14)

    def test_gap_rate_is_linear(self):
        """Test the log-log slope of the cosine gap"""
        alphas = (1.9, 1.95, 1.99, 1.995)
        gaps = []
        for alpha in alphas:
            noise = levy_measure.make_cylindrical_noise(alpha, (0.0,))
            gaps.append(generator_gap(self.pure, noise, coefficients.cosine(2.0), [0.0]).gap)
        slope, _ = fit_rate(alphas, gaps)
        assert 0.9 <= slope <= 1.1

    def test_constant_function(self):
        """Test that constants are annihilated"""
        noise = levy_measure.make_cylindrical_noise(1.5, (0.2,))
        value = apply_alpha_generator(self.pure, noise, coefficients.constant(3.0), [0.0])
        assert value == pytest.approx(0.0, abs=1e-8)

    def test_unbounded_function_rejected(self):
        """Test that an unbounded test function raises PreconditionError"""
        noise = levy_measure.make_cylindrical_noise(1.5, (0.0,))
        with pytest.raises(PreconditionError):
            apply_alpha_generator(self.pure, noise, coefficients.linear([1.0]), [0.0])

    def test_split_range(self):
        """Test that a zero split is rejected"""
        noise = levy_measure.make_cylindrical_noise(1.5, (0.0,))
        with pytest.raises(ParameterDomainError):
            generator_gap(self.pure, noise, coefficients.cosine(), [0.0], delta_split=0.0)


class TestLimitConsistency:
    """The nonlocal generator approaches the second-order one as alpha -> 2"""

    ALPHAS = (1.9, 1.95, 1.99, 1.995, 1.999)

    def _gaps(self, coeffs, beta, f, x):
        gaps = []
        for alpha in self.ALPHAS:
            noise = levy_measure.make_cylindrical_noise(alpha, (beta,))
            gaps.append(generator_gap(coeffs, noise, f, [x]).gap)
        return np.array(gaps)

    @pytest.mark.parametrize("beta", [0.0, 0.5])
    @pytest.mark.parametrize("x", [0.0, 0.4])
    def test_gaussian_bump_gap_shrinks(self, beta, x):
        """Test that the bump gap over 2 - alpha stays bounded and the gap goes to zero"""
        f = coefficients.gaussian_bump([0.1], width=0.7)
        gaps = self._gaps(coefficients.pure_noise(1), beta, f, x)
        ratios = np.abs(gaps) / (2.0 - np.array(self.ALPHAS))
        assert np.all(ratios <= 20.0)
        assert abs(gaps[-1]) <= 0.02
        assert abs(gaps[-1]) < abs(gaps[0])

    def test_gaussian_bump_gap_rate(self):
        """Test that the bump gap at a generic point decays linearly"""
        f = coefficients.gaussian_bump([0.1], width=0.7)
        gaps = self._gaps(coefficients.bounded_smooth(1), 0.0, f, 0.4)
        slope, _ = fit_rate(self.ALPHAS, gaps)
        assert 0.85 <= slope <= 1.15

    def test_limit_value_matches_second_order_generator(self):
        """Test that the report carries both generators evaluated directly"""
        f = coefficients.gaussian_bump([0.1], width=0.7)
        coeffs = coefficients.ou_type(1)
        noise = levy_measure.make_cylindrical_noise(1.95, (0.0,))
        report = generator_gap(coeffs, noise, f, [0.4])
        assert report.limit_value == pytest.approx(apply_limit_generator(coeffs, f, [0.4]), rel=1e-12)
        assert report.alpha_value == pytest.approx(apply_alpha_generator(coeffs, noise, f, [0.4]), rel=1e-10)


class TestRemainders:
    """Taylor and naive forms of the second-order remainder"""

    def test_forms_agree(self):
        """Test that both remainder forms agree away from zero"""
        f = coefficients.cosine(1.0)
        x, v = np.array([0.3]), np.array([1.0])
        for z in (1e-3, -1e-3, 0.1, 1.0):
            assert taylor_remainder(f, x, v, z) == pytest.approx(naive_remainder(f, x, v, z), rel=1e-8)

    def test_taylor_form_small_z(self):
        """Test the Taylor form against its leading term for tiny jumps"""
        f = coefficients.cosine(1.0)
        x, v = np.array([0.3]), np.array([1.0])
        z = 1e-7
        assert taylor_remainder(f, x, v, z) == pytest.approx(-0.5 * z * z * math.cos(0.3), rel=1e-6)


class TestCosineValueFunction:
    """Closed-form value functions of the limit SDE"""

    @staticmethod
    def value(preset, k):
        return lambda tau, x: cosine_value_function(preset, k, tau, x)

    def test_terminal_value(self):
        """Test that u at tau = 0 is the test function"""
        for preset in (CoefficientPreset.PURE_NOISE, CoefficientPreset.OU_TYPE):
            assert cosine_value_function(preset, 1.7, 0.0, 0.3) == pytest.approx(math.cos(1.7 * 0.3))

    @pytest.mark.parametrize("k,tau,x", [(1.0, 0.5, 0.3), (2.0, 0.2, -0.7)])
    def test_heat_equation(self, k, tau, x):
        """Test du/dtau = u_xx for pure noise by central differences"""
        u, h = self.value(CoefficientPreset.PURE_NOISE, k), 1e-4
        u_tau = (u(tau + h, x) - u(tau - h, x)) / (2 * h)
        u_xx = (u(tau, x + h) - 2 * u(tau, x) + u(tau, x - h)) / (h * h)
        assert u_tau == pytest.approx(u_xx, abs=1e-5)

    @pytest.mark.parametrize("k,tau,x", [(1.0, 0.5, 0.3), (2.0, 0.2, -0.7)])
    def test_ou_equation(self, k, tau, x):
        """Test du/dtau = -x u_x + u_xx for the OU preset by central differences"""
        u, h = self.value(CoefficientPreset.OU_TYPE, k), 1e-4
        u_tau = (u(tau + h, x) - u(tau - h, x)) / (2 * h)
        u_x = (u(tau, x + h) - u(tau, x - h)) / (2 * h)
        u_xx = (u(tau, x + h) - 2 * u(tau, x) + u(tau, x - h)) / (h * h)
        assert u_tau == pytest.approx(-x * u_x + u_xx, abs=1e-5)

    def test_no_closed_form(self):
        """Test that presets without a kernel give None"""
        assert cosine_value_function(CoefficientPreset.BOUNDED_SMOOTH, 1.0, 0.5, 0.3) is None
        assert cosine_value_function(CoefficientPreset.POLYNOMIAL, 1.0, 0.5, 0.3) is None

    def test_negative_horizon(self):
        """Test that a negative remaining horizon is rejected"""
        with pytest.raises(ParameterDomainError):
            cosine_value_function(CoefficientPreset.PURE_NOISE, 1.0, -0.1, 0.3)


class TestKolmogorovResidual:
    """Monte Carlo backward equation check"""

    def setup_method(self):
        self.key = RngStreamKey(seed=12, stream_id=2)
        self.f = coefficients.cosine(1.0)

    def test_heat_semigroup(self):
        """Test the residual and value for the heat semigroup"""
        grid = TimeGrid(horizon_T=1.0, n_steps=16)
        estimate = kolmogorov_residual(
            coefficients.pure_noise(1), self.f, 0.5, [0.3], grid, 20_000, self.key
        )
        assert abs(estimate.residual) <= 4.0 * estimate.std_error + 1e-3
        oracle = cosine_value_function(CoefficientPreset.PURE_NOISE, 1.0, 0.5, 0.3)
        assert estimate.u_value == pytest.approx(oracle, abs=0.02)
        assert not estimate.inconclusive

    @pytest.mark.slow
    def test_ou_matches_mehler(self):
        """Test the OU value against the Mehler kernel"""
        grid = TimeGrid(horizon_T=1.0, n_steps=200)
        estimate = kolmogorov_residual(coefficients.ou_type(1), self.f, 0.5, [0.3], grid, 20_000, self.key)
        oracle = cosine_value_function(CoefficientPreset.OU_TYPE, 1.0, 0.5, 0.3)
        assert estimate.u_value == pytest.approx(oracle, abs=0.02)
        assert abs(estimate.residual) <= 4.0 * estimate.std_error + 0.01

    def test_near_terminal_time(self):
        """Test that u is close to f just before the horizon"""
        grid = TimeGrid(horizon_T=1.0, n_steps=4)
        estimate = kolmogorov_residual(
            coefficients.pure_noise(1), self.f, 0.999, [0.3], grid, 2_000, self.key
        )
        assert estimate.u_value == pytest.approx(math.cos(0.3), abs=0.01)

    def test_time_outside_horizon(self):
        """Test that t = T is rejected"""
        grid = TimeGrid(horizon_T=1.0, n_steps=4)
        with pytest.raises(ParameterDomainError):
            kolmogorov_residual(coefficients.pure_noise(1), self.f, 1.0, [0.3], grid, 100, self.key)
