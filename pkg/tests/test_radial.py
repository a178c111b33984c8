"""Radial Crank-Nicolson engine, Biot-Savart quadrature and weighted norms."""

import numpy as np
import pytest

from helns.fields import shear_f, shear_g
from helns.radial import (
    DomainTooSmallError,
    RadialProfile,
    duhamel_gaussian_solution,
    kummer_tail_profile,
    mean_vorticity_from_utheta,
    oseen_extraction,
    profile_l2_norm_2d,
    radial_biot_savart,
    run_radial,
    step_radial,
    uniform_radii,
    weighted_l2m_norm_profile,
    zero_mass_check,
)


def _gaussian(r, s):
    return np.exp(-(r**2) / (4.0 * s)) / (4.0 * np.pi * s)


class TestProfile:
    def test_requires_axis_node(self):
        with pytest.raises(ValueError, match="r = 0"):
            RadialProfile(np.array([0.5, 1.0]), np.zeros(2))

    def test_requires_increasing_grid(self):
        with pytest.raises(ValueError, match="increasing"):
            RadialProfile(np.array([0.0, 1.0, 0.5]), np.zeros(3))

    def test_integrate_r_dr(self):
        r = uniform_radii(30.0, 6000)
        prof = RadialProfile(r, _gaussian(r, 1.0))
        # int G r dr = 1 / (2 pi) for the unit-mass Gaussian
        assert prof.integrate_r_dr() == pytest.approx(1.0 / (2 * np.pi), rel=1e-5)


class TestHeatEngine:
    def test_even_parity_gaussian_evolution(self):
        r = uniform_radii(40.0, 2048)
        prof = RadialProfile(r, _gaussian(r, 1.0))
        out = run_radial(prof, 1.0, 1.0 / 512, parity="even")
        exact = _gaussian(r, 2.0)
        assert np.max(np.abs(out.values - exact)) < 1e-6

    def test_odd_parity_shear_vorticity_evolution(self):
        # w_theta = -d/dr f obeys the odd-parity radial heat equation
        r = uniform_radii(40.0, 2048)
        prof = RadialProfile(r, shear_g(r, 0.0))
        out = run_radial(prof, 0.5, 1.0 / 1024, parity="odd")
        exact = shear_g(r, 0.5)
        assert np.max(np.abs(out.values - exact)) / np.max(np.abs(exact)) < 1e-4

    def test_odd_parity_pins_axis(self):
        r = uniform_radii(10.0, 256)
        prof = RadialProfile(r, r * np.exp(-(r**2)))
        out = step_radial(prof, 1e-3, parity="odd")
        assert out.values[0] == 0.0

    def test_constant_is_even_steady_state(self):
        r = uniform_radii(10.0, 128)
        prof = RadialProfile(r, np.full(r.size, 0.37))
        out = run_radial(prof, 0.5, 1e-2, parity="even", boundary_tol=1.0)
        assert np.allclose(out.values, 0.37, atol=1e-13)

    def test_zero_stays_zero(self):
        r = uniform_radii(10.0, 128)
        out = run_radial(RadialProfile(r, np.zeros_like(r)), 1.0, 1e-2, parity="even")
        assert np.all(out.values == 0.0)

    def test_domain_too_small(self):
        r = uniform_radii(5.0, 128)
        prof = RadialProfile(r, _gaussian(r, 20.0))
        with pytest.raises(DomainTooSmallError):
            run_radial(prof, 1.0, 1e-2, parity="even")

    def test_duhamel_source_oracle(self):
        # zero initial data, source S = e^{-t} Gaussian: matches the
        # closed-kernel Duhamel quadrature
        r = uniform_radii(40.0, 2048)
        prof = RadialProfile(r, np.zeros_like(r))

        def source_fn(t_mid, rr):
            return np.exp(-t_mid) * _gaussian(rr, 1.0)

        out = run_radial(prof, 1.0, 1.0 / 1024, source_fn=source_fn, parity="even")
        exact = duhamel_gaussian_solution(1.0, r)
        assert np.max(np.abs(out.values - exact)) / np.max(np.abs(exact)) < 1e-4

    def test_second_order_in_time(self):
        r = uniform_radii(40.0, 4096)
        h0 = _gaussian(r, 1.0)
        errs = []
        for nst in (8, 16, 32):
            out = run_radial(RadialProfile(r, h0), 1.0, 1.0 / nst, parity="even")
            errs.append(np.max(np.abs(out.values - _gaussian(r, 2.0))))
        order = np.log2(errs[0] / errs[1])
        assert order == pytest.approx(2.0, abs=0.2)
        assert np.log2(errs[1] / errs[2]) == pytest.approx(2.0, abs=0.3)

    def test_observer_cadence(self):
        r = uniform_radii(10.0, 64)
        seen = []
        run_radial(
            RadialProfile(r, _gaussian(r, 1.0)),
            0.1,
            0.01,
            parity="even",
            observer=lambda t, p: seen.append(t),
            observe_every=5,
            boundary_tol=1.0,
        )
        assert seen == pytest.approx([0.05, 0.10])


class TestBiotSavart:
    def test_utheta_from_gaussian_vorticity(self):
        r = uniform_radii(40.0, 8192)
        w_z = RadialProfile(r, _gaussian(r, 1.0))
        zero = RadialProfile(r, np.zeros_like(r))
        u_theta, u_z = radial_biot_savart(zero, w_z)
        expected = np.zeros_like(r)
        expected[1:] = (1.0 - np.exp(-(r[1:] ** 2) / 4.0)) / (2.0 * np.pi * r[1:])
        assert np.max(np.abs(u_theta.values - expected)) < 1e-6
        assert np.all(u_z.values == 0.0)

    def test_uz_from_shear_vorticity(self):
        # u_z(r) = int_r^inf w_theta drho recovers the shear profile
        r = uniform_radii(40.0, 8192)
        w_theta = RadialProfile(r, shear_g(r, 0.0))
        zero = RadialProfile(r, np.zeros_like(r))
        _, u_z = radial_biot_savart(w_theta, zero)
        assert np.max(np.abs(u_z.values - shear_f(r, 0.0))) < 1e-7

    def test_oseen_extraction_removes_circulation_tail(self):
        r = uniform_radii(40.0, 4096)
        w_z = RadialProfile(r, _gaussian(r, 1.0))
        zero = RadialProfile(r, np.zeros_like(r))
        u_theta, _ = radial_biot_savart(zero, w_z)
        v_theta = oseen_extraction(u_theta, 1.0, spread=1.0)
        # the unit-circulation Gaussian is exactly the background: remainder ~ 0
        assert np.max(np.abs(v_theta.values)) < 1e-5

    def test_zero_mass_check_agreement(self):
        r = uniform_radii(60.0, 8192)
        w = _gaussian(r, 0.5) - _gaussian(r, 2.0)  # zero total mass
        fwd, bwd = zero_mass_check(RadialProfile(r, w))
        # away from the axis the two integrals agree to quadrature accuracy
        inner = (r >= 1.0) & (r < 30.0)
        assert np.max(np.abs(fwd[inner] - bwd[inner])) < 1e-5

    def test_mean_vorticity_subtraction(self):
        r = uniform_radii(40.0, 1024)
        w_z = RadialProfile(r, 2.0 * _gaussian(r, 1.0))
        w_bar = mean_vorticity_from_utheta(w_z, 2.0, spread=1.0)
        assert np.max(np.abs(w_bar.values)) < 1e-15


class TestWeightedNorms:
    def test_m_zero_reduces_to_plain_l2(self):
        r = uniform_radii(30.0, 2048)
        prof = RadialProfile(r, _gaussian(r, 1.0))
        plain = profile_l2_norm_2d(prof) * np.sqrt(2 * np.pi * 1.0)
        assert weighted_l2m_norm_profile(prof, 0.0, 1.0) == pytest.approx(
            plain, rel=1e-13
        )

    def test_monotone_in_m(self):
        r = uniform_radii(30.0, 2048)
        prof = RadialProfile(r, _gaussian(r, 1.0))
        norms = [weighted_l2m_norm_profile(prof, m, 1.0) for m in (0.0, 1.0, 1.5, 2.0)]
        assert np.all(np.diff(norms) > 0)

    def test_gaussian_closed_form(self):
        # for m = 1: int (1+r^2) G^2 r dr with G = e^{-r^2/4}/(4 pi) has the
        # closed value (1/(4 pi)^2) * (1 + 2) = 3/(16 pi^2) when int e^{-r^2/2} r dr = 1...
        # computed directly: int e^{-r^2/2} r dr = 1, int r^2 e^{-r^2/2} r dr = 2
        r = uniform_radii(40.0, 8192)
        prof = RadialProfile(r, np.exp(-(r**2) / 4.0) / (4.0 * np.pi))
        expected_sq = (2 * np.pi) ** 2 * 1.0 / (4 * np.pi) ** 2 * (1.0 + 2.0)
        assert weighted_l2m_norm_profile(prof, 1.0, 1.0) ** 2 == pytest.approx(
            expected_sq, rel=1e-5
        )


class TestKummerTail:
    def test_rejects_nonintegrable_exponent(self):
        with pytest.raises(ValueError, match="exceed 2"):
            kummer_tail_profile(2.0, np.linspace(0, 10, 11))

    def test_power_law_tail(self):
        p = 2.55
        r = np.array([100.0, 200.0, 400.0])
        vals = kummer_tail_profile(p, r)
        fitted = -np.log(np.abs(vals[2] / vals[0])) / np.log(r[2] / r[0])
        assert fitted == pytest.approx(p, rel=1e-3)

    def test_zero_total_mass_in_the_scaling_sense(self):
        # the truncated mass decays like R^{2-p}: it shrinks with the cutoff
        # and is a tiny fraction of the unsigned core mass
        p = 2.55
        masses = {}
        for R, n in ((500.0, 50000), (2000.0, 200000)):
            r = uniform_radii(R, n)
            prof = RadialProfile(r, kummer_tail_profile(p, r))
            masses[R] = prof.integrate_r_dr()
        expected_ratio = (2000.0 / 500.0) ** (2.0 - p)
        assert abs(masses[2000.0] / masses[500.0]) == pytest.approx(
            expected_ratio, rel=0.1
        )
        r = uniform_radii(500.0, 50000)
        prof = RadialProfile(r, kummer_tail_profile(p, r))
        core = np.trapezoid(np.abs(prof.values) * r, r)
        assert abs(masses[500.0]) / core < 0.05
