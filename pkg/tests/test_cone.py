"""Cone machinery tests: heat kernel, diagonal defect, angle coefficients."""

import math

import numpy as np
import pytest
from scipy import integrate

from polydet import (ConeData, ConvergenceError, DomainError, SchemaError, a_mu,
                     coefficient_I, coefficient_I_numeric, coefficient_Itilde,
                     coefficient_d, cone_heat_kernel, hadamard_coth_integral,
                     itilde_primitive, macdonald_k0)

PI = math.pi


class TestConeData:
    def test_weight_relation(self):
        c = ConeData(3 * PI)
        assert c.b == pytest.approx(0.5, abs=1e-15)
        assert ConeData.from_weight(0.5).beta == pytest.approx(3 * PI, abs=1e-14)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            ConeData(0.0)
        with pytest.raises(DomainError):
            ConeData.from_weight(-1.0)


class TestHeatKernel:
    def test_plane_limit(self):
        for (r, phi, rp, phip) in ((1.0, 0.3, 0.8, 1.1), (0.4, -0.7, 1.5, 0.2)):
            d2 = r * r + rp * rp - 2 * r * rp * math.cos(phi - phip)
            for t in (0.05, 0.4):
                plane = math.exp(-d2 / (4 * t)) / (4 * PI * t)
                val = cone_heat_kernel(t, 2 * PI, (r, phi), (rp, phip))
                assert abs(val - plane) < 1e-10

    def test_symmetry(self):
        for beta in (1.3, PI, 2.7, 3 * PI):
            a = cone_heat_kernel(0.2, beta, (1.0, 0.4), (0.7, 1.5))
            b = cone_heat_kernel(0.2, beta, (0.7, 1.5), (1.0, 0.4))
            assert abs(a - b) < 1e-12

    def test_half_turn_cone_matches_images(self):
        # beta = pi: direct term plus a single reflection
        t, r = 0.1, 1.0
        val = cone_heat_kernel(t, PI, (r, 0.0), (r, 0.0))
        images = (1 + math.exp(-r * r / t)) / (4 * PI * t)
        assert abs(val - images) < 1e-12

    def test_quarter_plane_angle_matches_images(self):
        # beta = pi/2: four rotational images
        t, r, dphi = 0.15, 0.9, 0.37
        val = cone_heat_kernel(t, PI / 2, (r, dphi), (r, 0.0))
        images = sum(math.exp(-(2 * r * r - 2 * r * r * math.cos(dphi - k * PI / 2))
                              / (4 * t))
                     for k in range(4)) / (4 * PI * t)
        assert abs(val - images) < 1e-12

    def test_rejects_bad_time(self):
        with pytest.raises(DomainError):
            cone_heat_kernel(0.0, PI, (1, 0), (1, 0))


class TestDefect:
    def test_plane_defect_vanishes(self):
        for r in (0.2, 1.0, 3.3):
            for mu in (-5.0, -80.0):
                assert abs(a_mu(r, 2 * PI, mu)) < 1e-10

    def test_half_turn_cone_closed_form(self):
        for r, mu in ((1.0, -100.0), (0.4, -37.0)):
            expected = (-mu) / (2 * PI) * macdonald_k0(2 * r * math.sqrt(-mu)).real
            assert abs(a_mu(r, PI, mu) - expected) < 1e-12 * max(1, abs(expected))

    def test_imaginary_part_negligible(self):
        val = a_mu(0.5, 3 * PI, -50.0)
        assert abs(val.imag) < 1e-10

    def test_defect_real_across_angles(self):
        for beta in (0.9, 2.2, 2 * PI + 0.5, 11.0):
            val = a_mu(0.7, beta, -60.0)
            assert abs(val.imag) < 1e-10

    def test_radial_moment_reproduces_closed_form(self):
        # the central oracle identity behind coefficient_I, at finite mu
        for beta in (0.7, PI / 2, 2.2, PI, 3 * PI):
            val, _ = integrate.quad(lambda r: a_mu(r, beta, -80.0).real * r,
                                    0, 8.0, epsabs=1e-12, epsrel=1e-11, limit=300)
            assert abs(beta * val - coefficient_I(beta)) < 1e-9

    def test_rejects_bad_parameters(self):
        with pytest.raises(DomainError):
            a_mu(1.0, PI, 5.0)
        with pytest.raises(DomainError):
            a_mu(-1.0, PI, -5.0)


class TestCoefficients:
    def test_I_values(self):
        assert coefficient_I(2 * PI) == 0.0
        assert coefficient_I(4 * PI) == pytest.approx(-1.0 / 8.0, abs=1e-15)
        assert coefficient_I(PI) == pytest.approx(1.0 / 8.0, abs=1e-15)

    def test_Itilde_vanishes_on_plane(self):
        assert abs(coefficient_Itilde(2 * PI)) < 1e-14

    def test_Itilde_continuous_at_resonance(self):
        # pole enters/exits the contour at beta = pi; the snap keeps T continuous
        ref = coefficient_Itilde(PI)
        for delta in (1e-4, -1e-4):
            assert abs(coefficient_Itilde(PI + delta) - ref) < 5e-4

    def test_primitive_at_origin(self):
        assert itilde_primitive(2 * PI) == 0.0

    def test_primitive_derivative_is_minus_Itilde(self):
        h = 1e-5
        for beta in (4.0, 9.0, 4 * PI):
            fd = (itilde_primitive(beta + h) - itilde_primitive(beta - h)) / (2 * h)
            assert abs(fd + coefficient_Itilde(beta)) < 1e-8

    def test_d_at_plane_angle_is_one(self):
        assert coefficient_d(2 * PI) == 1.0
        assert coefficient_d(2 * PI, torus_mode=True, theta_prime_abs=2.85) == 1.0

    def test_d_torus_mode_matches_plain_at_unit_theta(self):
        beta = 3 * PI
        assert coefficient_d(beta, torus_mode=True, theta_prime_abs=1.0) == \
            pytest.approx(coefficient_d(beta), rel=1e-14)

    def test_d_requires_theta_in_torus_mode(self):
        with pytest.raises(SchemaError):
            coefficient_d(PI, torus_mode=True)


class TestHadamardFinitePart:
    def test_split_point_independence(self):
        for beta in (2 * PI, 3 * PI, 1.3):
            v1 = hadamard_coth_integral(beta, split=1.0)
            v2 = hadamard_coth_integral(beta, split=2.0)
            assert abs(v1 - v2) < 1e-10

    def test_rejects_bad_split(self):
        with pytest.raises(DomainError):
            hadamard_coth_integral(PI, split=0.0)


class TestAsymptoticFit:
    def test_plane_angle(self):
        fit = coefficient_I_numeric(2 * PI, (-100.0, -200.0, -400.0), eps=0.5)
        assert abs(fit.I_estimate) < 1e-6
        assert abs(fit.Itilde_estimate - coefficient_Itilde(2 * PI)) < 1e-3

    def test_half_turn_cone(self):
        fit = coefficient_I_numeric(PI)
        assert abs(fit.I_estimate - 1.0 / 8.0) < 1e-4

    def test_self_consistency_wide_angle(self):
        fit = coefficient_I_numeric(5 * PI)
        assert abs(fit.I_estimate - coefficient_I(5 * PI)) < 1e-4

    def test_rejects_positive_mu(self):
        with pytest.raises(DomainError):
            coefficient_I_numeric(PI, (100.0, -200.0))

    def test_flags_non_asymptotic_regime(self):
        with pytest.raises(ConvergenceError, match="asymptotic regime"):
            coefficient_I_numeric(PI / 2, (-0.5, -1.0), eps=0.5)

    def test_thread_cap_is_result_invariant(self, monkeypatch):
        base = coefficient_I_numeric(PI, (-100.0, -200.0), eps=0.3)
        monkeypatch.setenv("POLYDET_THREADS", "2")
        threaded = coefficient_I_numeric(PI, (-100.0, -200.0), eps=0.3)
        assert threaded.I_estimate == base.I_estimate
        assert threaded.Itilde_estimate == base.Itilde_estimate


class TestHeatTraceSmoke:
    def test_disk_trace_approaches_defect_constant(self):
        # integral over a disk of the diagonal defect of the kernel, small t
        beta, t, radius = 3 * PI, 0.004, 1.0
        val, _ = integrate.quad(
            lambda r: (cone_heat_kernel(t, beta, (r, 0.0), (r, 0.0))
                       - 1.0 / (4 * PI * t)) * r, 0, radius, limit=200)
        val *= beta
        expected = coefficient_I(beta)
        assert abs(val - expected) < 0.05 * abs(expected)
