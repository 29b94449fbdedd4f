"""Speed-limit boundaries, normalization and pulse-time scaling."""
import math

import numpy as np
import pytest

from basisgate.exceptions import DegenerateBoundary
from basisgate.hamiltonian import INFINITE_RATIO
from basisgate.speedlimit import (
    LinearSpeedLimit,
    SquaredSpeedLimit,
    TabulatedSpeedLimit,
    boundary_for_ratio,
    load_slf,
    min_time,
    normalize,
    scaled_duration,
)

PI = math.pi


class TestNormalize:
    def test_linear_rescales_to_half_pi(self):
        slf = normalize(LinearSpeedLimit(PI))
        assert slf.limit == pytest.approx(PI / 2)

    def test_squared_half_pi_fixed_point(self):
        slf = normalize(SquaredSpeedLimit(PI / 2))
        assert slf.limit == pytest.approx(PI / 2)

    def test_tabulated_scaling(self):
        tab = TabulatedSpeedLimit((0.0, 1.0, 2.0), (1.5, 1.0, 0.0))
        scaled = normalize(tab)
        assert max(scaled.x_intercept(), scaled.y_intercept()) == pytest.approx(PI / 2)
        assert scaled.g_c[1] == pytest.approx(1.0 * (PI / 2) / 2.0)

    def test_idempotent(self):
        tab = normalize(TabulatedSpeedLimit((0.0, 1.0, 2.0), (1.5, 1.0, 0.0)))
        again = normalize(tab)
        assert np.allclose(again.g_c, tab.g_c)
        assert np.allclose(again.g_g, tab.g_g)

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateBoundary):
            normalize(LinearSpeedLimit(0.0))


class TestBoundaryForRatio:
    def test_linear_equal_ratio(self):
        gc, gg = boundary_for_ratio(LinearSpeedLimit(PI / 2), 1.0)
        assert gc == pytest.approx(PI / 4)
        assert gg == pytest.approx(PI / 4)

    def test_squared_equal_ratio(self):
        gc, gg = boundary_for_ratio(SquaredSpeedLimit(PI / 2), 1.0)
        assert gc == pytest.approx(PI / (2 * math.sqrt(2)))
        assert gg == pytest.approx(PI / (2 * math.sqrt(2)))

    def test_zero_ratio_hits_x_intercept(self):
        for slf in (LinearSpeedLimit(PI / 2), SquaredSpeedLimit(PI / 2)):
            gc, gg = boundary_for_ratio(slf, 0.0)
            assert gc == pytest.approx(PI / 2)
            assert gg == 0.0

    def test_infinite_ratio_hits_y_intercept(self):
        gc, gg = boundary_for_ratio(SquaredSpeedLimit(PI / 2), INFINITE_RATIO)
        assert gc == 0.0
        assert gg == pytest.approx(PI / 2)

    def test_tabulated_interpolation(self):
        # boundary: straight line from (0, 1) to (1, 0); ray beta=1 meets at 0.5
        tab = TabulatedSpeedLimit((0.0, 1.0), (1.0, 0.0))
        gc, gg = boundary_for_ratio(tab, 1.0)
        assert gc == pytest.approx(0.5)
        assert gg == pytest.approx(0.5)

    def test_tabulated_clamped_tail(self):
        tab = TabulatedSpeedLimit((0.0, 1.0), (1.0, 0.5))
        gc, gg = boundary_for_ratio(tab, 0.25)
        assert gg == pytest.approx(0.5)
        assert gc == pytest.approx(2.0)

    def test_oracle_on_boundary(self):
        # intersection point satisfies both the ray and boundary equations
        rng = np.random.default_rng(31)
        tab = normalize(TabulatedSpeedLimit((0.0, 0.5, 1.2, 2.0), (1.8, 1.5, 0.9, 0.1)))
        for _ in range(50):
            beta = rng.uniform(0.05, 20)
            gc, gg = boundary_for_ratio(tab, beta)
            assert gg == pytest.approx(beta * gc, rel=1e-9)
            assert gg == pytest.approx(tab.boundary(gc), abs=1e-9)


class TestMinTime:
    def test_iswap_normalized_to_one(self):
        assert min_time(LinearSpeedLimit(PI / 2), PI / 2, 0.0) == pytest.approx(1.0)

    def test_sqiswap_half(self):
        assert min_time(LinearSpeedLimit(PI / 2), PI / 4, 0.0) == pytest.approx(0.5)

    def test_sqcnot_squared(self):
        t = min_time(SquaredSpeedLimit(PI / 2), PI / 8, PI / 8)
        assert t == pytest.approx(math.sqrt(2) / 4, abs=5e-3)  # 0.354

    def test_b_family_squared(self):
        t = min_time(SquaredSpeedLimit(PI / 2), 3 * PI / 8, PI / 8)
        assert t == pytest.approx(math.sqrt(10) / 4, abs=5e-3)  # 0.79

    def test_pure_gain(self):
        assert min_time(LinearSpeedLimit(PI / 2), 0.0, PI / 4) == pytest.approx(0.5)

    def test_zero_angles(self):
        assert min_time(LinearSpeedLimit(PI / 2), 0.0, 0.0) == 0.0

    def test_family_consistency(self):
        # on any ray, t_min * g_c_max recovers theta_c exactly
        rng = np.random.default_rng(32)
        slf = SquaredSpeedLimit(PI / 2)
        for _ in range(100):
            th_c = rng.uniform(0.01, PI / 2)
            th_g = rng.uniform(0.0, PI / 2)
            gc, _ = boundary_for_ratio(slf, th_g / th_c)
            assert min_time(slf, th_c, th_g) * gc == pytest.approx(th_c, rel=1e-12)

    def test_fractional_additivity(self):
        slf = SquaredSpeedLimit(PI / 2)
        t_full = min_time(slf, PI / 4, PI / 8)
        for n in (2, 3, 5):
            assert min_time(slf, PI / 4 / n, PI / 8 / n) == pytest.approx(t_full / n)

    def test_monotone_under_shrinking_boundary(self):
        big = TabulatedSpeedLimit((0.0, 1.0, 2.0), (2.0, 1.4, 0.2))
        small = TabulatedSpeedLimit((0.0, 1.0, 2.0), (1.6, 1.0, 0.1))
        rng = np.random.default_rng(33)
        for _ in range(50):
            th_c = rng.uniform(0.01, 1.0)
            th_g = rng.uniform(0.0, 1.0)
            assert min_time(small, th_c, th_g) >= min_time(big, th_c, th_g) - 1e-12

    def test_scale_covariance(self):
        tab = TabulatedSpeedLimit((0.0, 1.0, 2.0), (2.0, 1.4, 0.2))
        t1 = min_time(normalize(tab), 0.7, 0.2)
        t2 = min_time(normalize(tab.scaled(17.0)), 0.7, 0.2)
        assert t1 == pytest.approx(t2, rel=1e-12)


class TestScaledDuration:
    def test_table_values(self):
        assert scaled_duration(2, 0.5, 0.25) == pytest.approx(1.75)
        assert scaled_duration(3, 0.5, 0.25) == pytest.approx(2.50)

    def test_zero_reps_is_one_layer(self):
        assert scaled_duration(0, 0.5, 0.25) == pytest.approx(0.25)


class TestTabulatedValidation:
    def test_rejects_noisy_boundary(self):
        with pytest.raises(ValueError):
            TabulatedSpeedLimit((0.0, 1.0, 2.0), (1.0, 1.2, 0.5))

    def test_csv_round_trip(self, tmp_path):
        p = tmp_path / "slf.csv"
        p.write_text("g_c,g_g\n0.0,2.0\n1.0,1.5\n2.0,0.0\n")
        tab = load_slf(p)
        assert tab.g_c == (0.0, 1.0, 2.0)
        assert tab.g_g == (2.0, 1.5, 0.0)

    def test_csv_isotonic_repair(self, tmp_path):
        p = tmp_path / "noisy.csv"
        p.write_text("g_c,g_g\n0.0,2.0\n1.0,2.1\n2.0,0.5\n")
        with pytest.raises(ValueError):
            load_slf(p)
        with pytest.warns(UserWarning):
            tab = load_slf(p, strict=False)
        assert tab.g_g == (2.0, 2.0, 0.5)

    def test_csv_bad_header(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n0,1\n")
        with pytest.raises(ValueError):
            load_slf(p)
