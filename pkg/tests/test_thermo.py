"""Tests for partition functions, WKB levels and specific heat."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from sct.errors import ConvergenceError, DomainError, TruncationError
from sct.paths import ReducedParams, q_theta_max, quartic_path_from_qt
from sct.thermo import (
    _phase_integral,
    _z2_quartic_integrand,
    gamma_half,
    jacobian_dq0_dqt,
    ln_z_classical,
    ln_z_harmonic,
    specific_heat,
    thermo_curve,
    wkb_levels,
    z2_harmonic_integral,
    z2_quartic,
    z_classical,
    z_harmonic,
    z_wkb,
    ThermoCurve,
    WkbSpectrum,
)


def harmonic_specific_heat(Theta):
    return (0.5 * Theta / math.sinh(0.5 * Theta)) ** 2


class TestGammaHalf:
    def test_table_matches_gamma(self):
        for D in range(1, 16):
            assert gamma_half(D) == pytest.approx(math.gamma(0.5 * D), rel=1e-14)


class TestHarmonicPartition:
    def test_values(self):
        assert z_harmonic(1, 1.0) == pytest.approx(1.0 / (2.0 * math.sinh(0.5)), rel=1e-13)
        assert z_harmonic(2, 2.0) == pytest.approx((2.0 * math.sinh(1.0)) ** -2, rel=1e-13)

    def test_ground_state_dominance(self):
        Theta = 900.0
        assert ln_z_harmonic(1, Theta) == pytest.approx(-0.5 * Theta, rel=1e-12)

    def test_pipeline_reproduces_closed_form(self):
        for D in (1, 2, 3):
            for Theta in (0.25, 0.5, 1.0, 2.0, 4.0):
                assert z2_harmonic_integral(D, Theta) == pytest.approx(
                    z_harmonic(D, Theta), rel=1e-8)


class TestJacobian:
    @pytest.mark.parametrize("qt,Theta", [(0.3, 1.0), (0.5, 1.0), (1.0, 1.0),
                                          (2.0, 1.0), (1.0, 2.0), (0.5, 0.5)])
    def test_matches_finite_differences(self, qt, Theta):
        h = 1e-6 * qt
        fd = (quartic_path_from_qt(qt + h, Theta).q0
              - quartic_path_from_qt(qt - h, Theta).q0) / (2.0 * h)
        ident = jacobian_dq0_dqt(quartic_path_from_qt(qt, Theta))
        assert ident == pytest.approx(fd, rel=1e-6)

    def test_harmonic_limit(self):
        for Theta in (0.5, 1.0, 2.0):
            path = quartic_path_from_qt(0.0, Theta)
            assert jacobian_dq0_dqt(path) == pytest.approx(math.cosh(0.5 * Theta), rel=1e-13)
        small = jacobian_dq0_dqt(quartic_path_from_qt(1e-5, 2.0))
        assert small == pytest.approx(math.cosh(1.0), rel=1e-8)

    def test_diverges_at_cap(self):
        Theta = 1.0
        cap = q_theta_max(Theta)
        vals = [jacobian_dq0_dqt(quartic_path_from_qt(f * cap, Theta))
                for f in (0.9, 0.99, 0.999)]
        assert vals[0] < vals[1] < vals[2]
        assert vals[2] > 1e3


class TestZ2Quartic:
    def test_weak_coupling_limit(self):
        for D in (1, 2, 3):
            params = ReducedParams(1e-3, D, 1.0)
            ratio = z2_quartic(params) / z_harmonic(D, 1.0)
            assert abs(ratio - 1.0) <= 1e-2

    def test_lnz_decreasing_in_theta(self):
        vals = [math.log(z2_quartic(ReducedParams(0.5, 1, th)))
                for th in (0.5, 1.0, 2.0, 4.0)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_integrand_small_qt_scaling(self):
        # integrand / q_t^(D-1) tends to a finite positive constant
        params = ReducedParams(0.5, 3, 1.0)
        f = _z2_quartic_integrand(params, check_routes=False)
        scaled = [f(qt) / qt ** 2 for qt in (1e-3, 1e-4, 1e-5)]
        assert scaled[0] == pytest.approx(scaled[1], rel=1e-4)
        assert scaled[1] == pytest.approx(scaled[2], rel=1e-4)
        # the limit is cosh(Th/2)^D / (2 pi sinh Th)^(D/2) * cosh(Th/2)^(D-1 -> via q0)
        Theta = 1.0
        limit = (math.cosh(0.5 * Theta) ** 3
                 / (2.0 * math.pi * math.sinh(Theta)) ** 1.5)
        assert scaled[2] == pytest.approx(limit, rel=1e-3)

    def test_rejects_zero_coupling(self):
        with pytest.raises(DomainError):
            z2_quartic(ReducedParams(0.0, 1, 1.0))

    def test_deterministic(self):
        params = ReducedParams(0.3, 2, 0.7)
        assert z2_quartic(params) == z2_quartic(params)


class TestZClassical:
    def test_harmonic_limit(self):
        assert z_classical(ReducedParams(1e-12, 1, 2.0)) == pytest.approx(0.5, rel=1e-7)

    def test_high_temperature_specific_heat(self):
        # quartic-dominated scaling gives C -> 3D/4 as Theta -> 0
        for D, g in ((1, 0.5), (3, 0.2)):
            lnz = lambda th: ln_z_classical(ReducedParams(g, D, th), tol=1e-13)
            c, _ = specific_heat(lnz, 1e-5)
            assert c == pytest.approx(0.75 * D, rel=2e-3)

    def test_monte_carlo_oracle(self):
        # Z_cl = Theta^-D E[exp(-Theta g r^4 / 4)] over x ~ N(0, 1/Theta)^D
        g, D, Theta = 0.5, 3, 1.0
        rng = np.random.default_rng(20240817)
        x = rng.standard_normal((4_000_000, D)) / math.sqrt(Theta)
        r4 = (x * x).sum(axis=1) ** 2
        oracle = float(np.exp(-0.25 * Theta * g * r4).mean()) / Theta ** D
        # three significant digits
        assert z_classical(ReducedParams(g, D, Theta)) == pytest.approx(oracle, rel=1e-3)


def phase_integral_oracle(energy, g):
    """Direct adaptive quadrature of 4 int_0^{x+} sqrt(2[E - V(x)]) dx."""
    xp = math.sqrt(4.0 * energy / (1.0 + math.sqrt(1.0 + 4.0 * g * energy)))
    val, _ = quad(lambda x: math.sqrt(max(2.0 * (energy - 0.5 * x * x - 0.25 * g * x ** 4), 0.0)),
                  0.0, xp, epsabs=1e-14, epsrel=1e-12, limit=200)
    return 4.0 * val


class TestWkb:
    def test_harmonic_levels_exact(self):
        spectrum = wkb_levels(0.0, 12)
        for n, e in enumerate(spectrum.levels):
            assert e == pytest.approx(n + 0.5, abs=1e-9)

    def test_levels_monotone(self):
        spectrum = wkb_levels(0.2, 10)
        assert all(b > a for a, b in zip(spectrum.levels, spectrum.levels[1:]))

    def test_quantization_residual(self):
        spectrum = wkb_levels(0.2, 6)
        for n, e in enumerate(spectrum.levels):
            assert _phase_integral(e, 0.2) == pytest.approx(
                2.0 * math.pi * (n + 0.5), abs=1e-9)

    def test_ground_state_against_independent_quadrature(self):
        # independent oracle: invert the quadrature-evaluated phase integral
        g = 0.2
        oracle = brentq(lambda e: phase_integral_oracle(e, g) - math.pi,
                        0.3, 1.0, xtol=1e-12)
        got = wkb_levels(g, 0).levels[0]
        assert got == pytest.approx(oracle, abs=5e-9)
        # note: the lowest-order quantization shift for n = 0 is ~3g/32,
        # about half of the first-order perturbative 3g/16
        assert got == pytest.approx(0.5 + 3.0 * g / 32.0, abs=2e-3)

    def test_spectrum_validation(self):
        with pytest.raises(DomainError):
            WkbSpectrum((0.5, 0.4), 0.1, 1)

    def test_z_wkb_harmonic(self):
        spectrum = wkb_levels(0.0, 90)
        for Theta in (0.5, 1.0, 3.0):
            assert z_wkb(spectrum, Theta) == pytest.approx(z_harmonic(1, Theta), rel=1e-12)

    def test_z_wkb_ground_state_dominance(self):
        spectrum = wkb_levels(0.2, 5)
        Theta = 40.0
        assert math.log(z_wkb(spectrum, Theta)) + Theta * spectrum.levels[0] == pytest.approx(
            0.0, abs=1e-12)

    def test_z_wkb_truncation_error(self):
        spectrum = wkb_levels(0.2, 3)
        with pytest.raises(TruncationError):
            z_wkb(spectrum, 0.2)

    def test_z_wkb_stable_under_doubling(self):
        g, Theta = 0.2, 5.0
        a = z_wkb(wkb_levels(g, 16), Theta)
        b = z_wkb(wkb_levels(g, 32), Theta)
        assert a == pytest.approx(b, rel=1e-12)


class TestSpecificHeat:
    def test_harmonic_closed_form(self):
        lnz = lambda th: ln_z_harmonic(1, th)
        for Theta in (0.5, 1.0, 2.0, 5.0):
            c, err = specific_heat(lnz, Theta)
            assert c == pytest.approx(harmonic_specific_heat(Theta), abs=1e-8)
            assert err < 1e-6

    def test_reference_value(self):
        c, _ = specific_heat(lambda th: ln_z_harmonic(1, th), 1.0)
        assert c == pytest.approx(0.920674, abs=1e-6)

    def test_gapped_limit(self):
        c, _ = specific_heat(lambda th: ln_z_harmonic(1, th), 60.0)
        assert abs(c) < 1e-6

    def test_dimension_scaling(self):
        c1, _ = specific_heat(lambda th: ln_z_harmonic(1, th), 1.3)
        c3, _ = specific_heat(lambda th: ln_z_harmonic(3, th), 1.3)
        assert c3 == pytest.approx(3.0 * c1, rel=1e-9)

    def test_step_collapse_error(self):
        rng = np.random.default_rng(7)
        noisy = lambda th: ln_z_harmonic(1, th) + 1e-4 * rng.standard_normal()
        with pytest.raises(ConvergenceError):
            specific_heat(noisy, 1.0, target_err=1e-6)

    def test_domain(self):
        with pytest.raises(DomainError):
            specific_heat(lambda th: 0.0, -1.0)


class TestThermoCurve:
    def test_build_and_validate(self):
        curve = thermo_curve(lambda th: ln_z_harmonic(1, th), [0.5, 1.0, 2.0])
        assert curve.T_grid == (0.5, 1.0, 2.0)
        assert curve.C[2] == pytest.approx(harmonic_specific_heat(0.5), abs=1e-8)
        with pytest.raises(DomainError):
            ThermoCurve((1.0, 0.5), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0))
        with pytest.raises(DomainError):
            ThermoCurve((0.5, 1.0), (0.0,), (0.0, 0.0), (0.0, 0.0))
