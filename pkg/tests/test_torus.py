"""Genus-1 engine tests: potential, pair functional, area, assembly."""

import math

import numpy as np
import pytest

from polydet import (DomainError, TorusMetricSpec, coefficient_I, dedekind_eta,
                     torus_D, torus_area, torus_c0, torus_log_det, torus_phi)

CANONICAL = dict(modulus=1j, points=((0.2, 0.5), (0.7 + 0.3j, -0.5)))


def canonical(scale=1.0):
    return TorusMetricSpec(CANONICAL["modulus"], CANONICAL["points"], scale)


class TestSpecValidation:
    def test_rejects_unbalanced_weights(self):
        with pytest.raises(DomainError):
            TorusMetricSpec(1j, ((0.2, 0.5), (0.6j, -0.25)))

    def test_rejects_coincident_points_mod_lattice(self):
        with pytest.raises(DomainError):
            TorusMetricSpec(1j, ((0.2, 0.5), (1.2 + 1j, -0.5)))

    def test_rejects_weight_below_minus_one(self):
        with pytest.raises(DomainError):
            TorusMetricSpec(1j, ((0.2, -1.5), (0.5, 1.5)))

    def test_reduces_points_to_fundamental_domain(self):
        spec = TorusMetricSpec(1j, ((3.2 + 2.3j, 0.5), (0.7 + 0.3j, -0.5)))
        p = spec.points[0][0]
        assert 0 <= p.real < 1 and 0 <= p.imag < 1
        assert abs(p - (0.2 + 0.3j)) < 1e-12


class TestPhi:
    def test_empty_divisor_is_constant(self):
        spec = TorusMetricSpec(1j, ())
        assert torus_phi(spec, 0.3 + 0.4j) == 0.0
        spec_c = TorusMetricSpec(1j, (), 2.0)
        assert torus_phi(spec_c, 0.1j + 0.2) == pytest.approx(-math.log(2.0))

    def test_lattice_invariance(self):
        spec = canonical()
        for z in (0.11 + 0.23j, 0.8 + 0.77j):
            base = torus_phi(spec, z)
            assert abs(torus_phi(spec, z + 1) - base) < 1e-10
            assert abs(torus_phi(spec, z + 1j) - base) < 1e-10

    def test_cone_point_rejected(self):
        with pytest.raises(DomainError):
            torus_phi(canonical(), 0.2)

    def test_scale_shift(self):
        z = 0.45 + 0.11j
        d = torus_phi(canonical(3.0), z) - torus_phi(canonical(1.0), z)
        assert d == pytest.approx(-math.log(3.0), abs=1e-14)


class TestPairFunctional:
    def test_vanishes_quadratically_in_weights(self):
        base = abs(torus_D(TorusMetricSpec(1j, ((0.2, 1e-3), (0.7 + 0.3j, -1e-3)))))
        half = abs(torus_D(TorusMetricSpec(1j, ((0.2, 5e-4), (0.7 + 0.3j, -5e-4)))))
        assert base / half == pytest.approx(4.0, rel=1e-6)

    def test_swap_invariance_bitwise(self):
        s1 = TorusMetricSpec(1j, ((0.2, 0.5), (0.7 + 0.3j, -0.5)))
        s2 = TorusMetricSpec(1j, ((0.7 + 0.3j, -0.5), (0.2, 0.5)))
        assert torus_D(s1) == torus_D(s2)

    def test_equal_weight_swap_symmetric(self):
        s1 = TorusMetricSpec(1j, ((0.15, 0.3), (0.6 + 0.4j, 0.3), (0.3 + 0.7j, -0.6)))
        s2 = TorusMetricSpec(1j, ((0.6 + 0.4j, 0.3), (0.15, 0.3), (0.3 + 0.7j, -0.6)))
        assert torus_D(s1) == torus_D(s2)


class TestArea:
    def test_unit_square(self):
        assert torus_area(TorusMetricSpec(1j, ())) == pytest.approx(1.0, abs=1e-14)

    def test_constant_conformal_factor(self):
        spec = TorusMetricSpec(1 + 2j, (), 2.5)
        assert torus_area(spec) == pytest.approx(5.0, rel=1e-13)

    def test_scale_linearity_with_divisor(self):
        a1 = torus_area(canonical(1.0), tol=1e-7)
        a2 = torus_area(canonical(2.0), tol=1e-7)
        assert a2 == pytest.approx(2.0 * a1, rel=1e-9)

    def test_refinement_stability(self):
        coarse = torus_area(canonical(), tol=1e-5)
        fine = torus_area(canonical(), tol=1e-8)
        assert coarse == pytest.approx(fine, rel=2e-5)


class TestAssembly:
    def test_ray_singer_closure(self):
        for b in (1j, 0.5 + 1j * math.sqrt(3) / 2, 2j):
            res = torus_log_det(TorusMetricSpec(b, ()))
            expected = math.log(b.imag * abs(dedekind_eta(b)) ** 4)
            assert abs(res.log_det_over_area - expected) < 1e-12

    def test_continuity_at_zero_weights(self):
        res = torus_log_det(TorusMetricSpec(1j, ((0.2, 1e-4), (0.7 + 0.3j, -1e-4))))
        assert abs(res.log_det_over_area - math.log(torus_c0(1j))) < 1e-3

    def test_scaling_law_exact(self):
        r1 = torus_log_det(canonical(1.0))
        for c in (2.0, 0.31):
            rc = torus_log_det(canonical(c))
            expected = -sum(coefficient_I(b) for b in canonical().angles) * math.log(c)
            assert abs((rc.log_det_over_area - r1.log_det_over_area) - expected) < 1e-12

    def test_assembly_identity_exact(self):
        res = torus_log_det(canonical(1.7))
        recomposed = (res.D + math.log(res.c0) + res.sum_log_d2 + res.scaling_term)
        assert res.log_det_over_area == recomposed

    def test_lattice_invariance(self):
        r1 = torus_log_det(canonical())
        shifted = TorusMetricSpec(1j, ((1.2, 0.5), (0.7 + 1.3j, -0.5)))
        r2 = torus_log_det(shifted)
        assert abs(r1.log_det_over_area - r2.log_det_over_area) < 1e-9

    def test_relabeling_bitwise(self):
        r1 = torus_log_det(TorusMetricSpec(1j, ((0.2, 0.5), (0.7 + 0.3j, -0.5))))
        r2 = torus_log_det(TorusMetricSpec(1j, ((0.7 + 0.3j, -0.5), (0.2, 0.5))))
        assert r1.log_det_over_area == r2.log_det_over_area

    def test_position_continuity(self):
        # smoothness of the assembled value in a divisor position
        vals = []
        for d in (-1e-4, 0.0, 1e-4):
            spec = TorusMetricSpec(1j, ((0.2 + d, 0.5), (0.7 + 0.3j, -0.5)))
            vals.append(torus_log_det(spec).log_det_over_area)
        second = vals[0] - 2 * vals[1] + vals[2]
        assert abs(second) < 1e-5

    def test_area_attached_to_result(self):
        res = torus_log_det(TorusMetricSpec(1j, ()), include_area=True)
        assert res.area == pytest.approx(1.0, abs=1e-12)
        assert res.log_det == pytest.approx(res.log_det_over_area, abs=1e-12)


class TestC0:
    def test_value_at_i(self):
        assert torus_c0(1j) == pytest.approx(abs(dedekind_eta(1j)) ** 4, rel=1e-14)

    def test_shift_invariance(self):
        assert torus_c0(0.3 + 1.4j) == pytest.approx(torus_c0(1.3 + 1.4j), rel=1e-13)

    def test_ray_singer_form(self):
        b = 2j
        assert torus_c0(b) == pytest.approx(b.imag * abs(dedekind_eta(b)) ** 4,
                                            rel=1e-15)
