import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trfoci.model import PulseParams, symmetric_grid
from trfoci.shaping import (DegenerateGeometryError, assemble_cfoci_shaping,
                            assemble_trfoci_shaping, cfoci_plateau_start,
                            linear_segment, polynomial_coefficients, resample_time)

TABLE = {
    1: (2.88, 0.52, 0.46, 0.45, 0.68, 1.00, 0.29, 2.33, 4.27, 0.10, 0.40),
    5: (3.99, 0.28, 0.67, 0.11, 0.22, 0.09, 0.96, 5.83, 5.82, 0.14, 1.21),
    50: (5.98, 0.32, 0.73, 0.18, 0.33, 0.81, 0.04, 4.9, 4.90, 0.00, 0.83),
    200: (3.32, 0.30, 0.64, 0.27, 0.59, 0.00, 1.00, 7.71, 3.90, 0.25, 0.40),
}
GRID = symmetric_grid(200, 1.0)


def telescoped(c, r2, r3, r4, r5, w):
    """Polynomial value at the joint, summed term by term."""
    a_min, *b = polynomial_coefficients(c, r2, r3, r4, r5, w)
    u = w - 1.0
    return a_min + sum(bk * u ** (2 * (k + 1)) for k, bk in enumerate(b))


class TestLinearSegment:
    def test_start(self):
        assert linear_segment(2.88, 0.46, 0.52, -1.0) == 2.88

    def test_end_is_c(self):
        assert linear_segment(2.88, 0.46, 0.52, 0.52 - 1.0) == pytest.approx(1.5552, rel=1e-12)

    def test_flat(self):
        t = np.linspace(-1, -0.5, 7)
        np.testing.assert_array_equal(linear_segment(3.0, 0.0, 0.5, t), 3.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            linear_segment(2.0, 0.5, 0.5, 0.0)


class TestPolynomialCoefficients:
    def test_r3_one(self):
        a_min, b1, b2, b3, b4 = polynomial_coefficients(2.0, 0.3, 1.0, 0.4, 0.5, 0.4)
        assert b2 == b3 == b4 == 0
        assert b1 * 0.36 == pytest.approx(2.0 - a_min, rel=1e-12)

    def test_r2_one(self):
        a_min, *b = polynomial_coefficients(2.0, 1.0, 0.3, 0.4, 0.5, 0.4)
        assert a_min == 2.0 and b == [0, 0, 0, 0]

    def test_table_row(self):
        a_max, w, r1, r2, r3, r4, r5 = TABLE[5][:7]
        c = a_max * (1 - r1)
        assert telescoped(c, r2, r3, r4, r5, w) == pytest.approx(c, rel=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateGeometryError):
            polynomial_coefficients(1.0, 0.5, 0.5, 0.5, 0.5, 1.0)

    def test_random_tuples(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            c = rng.uniform(0.01, 30)
            r2, r3, r4, r5 = rng.uniform(0, 1, 4)
            w = rng.uniform(0.01, 0.99)
            coeffs = polynomial_coefficients(c, r2, r3, r4, r5, w)
            assert min(coeffs) >= 0
            assert abs(telescoped(c, r2, r3, r4, r5, w) - c) <= 1e-12 * c


class TestTrfociShaping:
    @pytest.mark.parametrize("sl", sorted(TABLE))
    def test_endpoints_symmetry_positivity(self, sl):
        p = PulseParams.trfoci(*TABLE[sl])
        s = assemble_trfoci_shaping(p, GRID)
        assert s.samples[0] == s.samples[-1] == p.a_max
        np.testing.assert_array_equal(s.samples, s.samples[::-1])
        assert np.all(s.samples > 0)

    @pytest.mark.parametrize("sl", sorted(TABLE))
    def test_center_is_a_min(self, sl):
        p = PulseParams.trfoci(*TABLE[sl])
        odd = symmetric_grid(201, 1.0)
        s = assemble_trfoci_shaping(p, odd)
        assert s.samples[100] == s.a_min
        assert s.samples.min() == s.a_min

    def test_fifty_mm_max(self):
        s = assemble_trfoci_shaping(PulseParams.trfoci(*TABLE[50]), GRID)
        assert s.samples.max() == 5.98

    @pytest.mark.parametrize("sl", sorted(TABLE))
    def test_continuity_at_joint(self, sl):
        p = PulseParams.trfoci(*TABLE[sl])
        joint = p.w - 1.0
        a1 = linear_segment(p.a_max, p.r1, p.w, joint)
        s = assemble_trfoci_shaping(p, np.array([joint * (1 - 1e-15)]))
        a2 = telescoped(p.a_max * (1 - p.r1), p.r2, p.r3, p.r4, p.r5, p.w)
        assert abs(a1 - a2) <= 1e-12 * p.a_max
        assert abs(s.samples[0] - a1) <= 1e-12 * p.a_max

    def test_boundary_sample_uses_linear_segment(self):
        p = PulseParams.trfoci(3.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 5, 5, 0, 0)
        s = assemble_trfoci_shaping(p, np.array([-0.5, 0.5]))
        assert s.samples[0] == s.samples[1] == 1.5


class TestCfociShaping:
    def test_center(self):
        s = assemble_cfoci_shaping(PulseParams.cfoci(10.0, 2.0, 5.0), np.array([0.0]))
        assert s.samples[0] == 1.0

    def test_cap_everywhere(self):
        s = assemble_cfoci_shaping(PulseParams.cfoci(1.0, 2.0, 5.0), GRID)
        np.testing.assert_array_equal(s.samples, 1.0)

    def test_cap_not_reached(self):
        s = assemble_cfoci_shaping(PulseParams.cfoci(19.8, 5.41, 1.45), GRID)
        assert s.samples[0] == s.samples[-1] == pytest.approx(np.cosh(1.45))
        assert s.samples[0] == pytest.approx(2.2488424, abs=1e-7)

    def test_plateau(self):
        p = PulseParams.cfoci(17.14, 1.67, 5.07)
        s = assemble_cfoci_shaping(p, GRID)
        t0 = cfoci_plateau_start(p.a_max, p.beta)
        np.testing.assert_array_equal(s.samples[np.abs(GRID) > t0], p.a_max)
        assert np.all(s.samples[np.abs(GRID) < t0] < p.a_max)

    @given(st.floats(1.0, 30.0), st.floats(1.0, 10.0))
    def test_continuity(self, a_max, beta):
        s = assemble_cfoci_shaping(PulseParams.cfoci(a_max, 1.0, beta), GRID)
        dt = GRID[1] - GRID[0]
        assert np.max(np.abs(np.diff(s.samples))) <= beta * np.sinh(beta) * dt * (1 + 1e-12)

    def test_requires_cap_above_one(self):
        with pytest.raises(ValueError):
            assemble_cfoci_shaping(PulseParams.cfoci(0.5, 1.0, 2.0), GRID)


class TestResampleTime:
    def test_identity(self):
        np.testing.assert_array_equal(resample_time(0, 0, GRID).samples, GRID)

    def test_value(self):
        assert resample_time(1, 1, np.array([0.5])).samples[0] == pytest.approx(0.21875, rel=1e-15)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            resample_time(-0.1, 0, GRID)

    @settings(max_examples=1000, deadline=None)
    @given(st.floats(0, 5), st.floats(0, 5))
    def test_invariants(self, tau1, tau2):
        odd = symmetric_grid(201, 1.0)
        T = resample_time(tau1, tau2, odd).samples
        assert T[0] == -1.0 and T[100] == 0.0 and T[-1] == 1.0
        assert np.all(np.diff(T) > 0)
        np.testing.assert_array_equal(T, -T[::-1])
