from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from sawladder.errors import SawLadderError
from sawladder.layout import (UNIFORM, ApodizationWindow, CapacitanceModel, DispersionTable,
                              dimension_from_c0, layout_c0, mean_overlap, scale_fingers,
                              select_period, window_value)

BARTLETT = ApodizationWindow("bartlett", 0.5)
CM = CapacitanceModel(1.1e-15)


@pytest.fixture(scope="module")
def sample_table():
    text = resources.files("sawladder").joinpath("data/sample_dispersion.csv").read_text()
    return DispersionTable.from_csv(text)


class TestWindow:
    @pytest.mark.parametrize("x, y", [(0, 1.0), (0.5, 0.0), (-0.5, 0.0), (0.25, 0.5), (-0.25, 0.5)])
    def test_bartlett_values(self, x, y):
        assert window_value(BARTLETT, x) == y

    def test_uniform_is_one(self):
        np.testing.assert_array_equal(window_value(UNIFORM, np.linspace(-3, 3, 7)), 1.0)

    def test_outside_extent(self):
        with pytest.raises(SawLadderError):
            window_value(BARTLETT, 0.51)

    @settings(max_examples=100)
    @given(a=st.floats(0.01, 10), t=st.floats(-1, 1))
    def test_even_and_bounded(self, a, t):
        w = ApodizationWindow("bartlett", a)
        x = t * a
        assert window_value(w, x) == window_value(w, -x)
        assert 0 <= window_value(w, x) <= 1

    def test_invalid_parameter(self):
        with pytest.raises(SawLadderError):
            ApodizationWindow("bartlett", 0)
        with pytest.raises(SawLadderError):
            ApodizationWindow("hann")


class TestMeanOverlap:
    def test_uniform(self):
        assert mean_overlap(UNIFORM) == 1.0

    @pytest.mark.parametrize("a", [0.1, 0.5, 1, 7.3])
    def test_bartlett_half(self, a):
        w = ApodizationWindow("bartlett", a)
        assert mean_overlap(w) == pytest.approx(0.5, abs=1e-9)
        # independent check: trapezoid rule on a grid containing the apex is exact
        x = np.linspace(-a, a, 2001)
        assert trapezoid(window_value(w, x), x) / (2 * a) == pytest.approx(0.5, abs=1e-12)

    def test_bounded(self):
        assert mean_overlap(BARTLETT) <= 1


class TestScaleFingers:
    @pytest.mark.parametrize("n", [2, 29, 39, 1000])
    def test_uniform_identity(self, n):
        assert scale_fingers(n, UNIFORM) == n

    def test_table_values(self):
        assert scale_fingers(39, BARTLETT, 2.37) == 92
        assert scale_fingers(29, BARTLETT, 2.37) == 69

    def test_analytic_default(self):
        assert scale_fingers(39, BARTLETT) == 78
        assert scale_fingers(29, BARTLETT) == 58

    def test_ties_round_away(self):
        assert scale_fingers(5, BARTLETT, 1.5) == 8  # 7.5
        assert scale_fingers(3, BARTLETT, 2.5) == 8  # 7.5

    @pytest.mark.parametrize("cal", [0, -1.0])
    def test_bad_calibration(self, cal):
        with pytest.raises(SawLadderError):
            scale_fingers(39, BARTLETT, cal)

    @given(n=st.integers(2, 10_000))
    def test_never_shrinks(self, n):
        assert scale_fingers(n, BARTLETT) >= n


class TestDispersion:
    def test_anchor(self, sample_table):
        lam, k2 = select_period(sample_table, 4.35e9)
        assert lam == 0.90
        assert k2 == pytest.approx(0.052)

    def test_node_hit(self, sample_table):
        i = 5
        lam, k2 = select_period(sample_table, sample_table.f_s[i])
        assert lam == sample_table.lam[i]
        assert k2 == sample_table.k2[i]

    def test_midpoint_on_linear_segment(self):
        t = DispersionTable((0.9, 1.0), (4.4e9, 4.0e9), (0.05, 0.04))
        lam, k2 = select_period(t, 4.2e9)
        assert lam == pytest.approx(0.95)
        assert k2 == pytest.approx(0.045)

    def test_no_extrapolation(self, sample_table):
        with pytest.raises(SawLadderError, match="outside"):
            select_period(sample_table, 5.5e9)
        with pytest.raises(SawLadderError):
            select_period(sample_table, 3.0e9)

    def test_monotone(self, sample_table):
        rng = np.random.default_rng(2)
        f = np.sort(rng.uniform(min(sample_table.f_s), max(sample_table.f_s), 1000))
        lams = [select_period(sample_table, x)[0] for x in f]
        assert np.all(np.diff(lams) <= 0)

    def test_invariants(self):
        with pytest.raises(SawLadderError):
            DispersionTable((0.9,), (4e9,), (0.05,))
        with pytest.raises(SawLadderError):
            DispersionTable((0.9, 1.0), (4.0e9, 4.4e9), (0.05, 0.04))
        with pytest.raises(SawLadderError):
            DispersionTable((1.0, 0.9), (4.4e9, 4.0e9), (0.05, 0.04))

    def test_csv_round_trip(self, sample_table):
        assert DispersionTable.from_csv(sample_table.to_csv()) == sample_table


class TestDimension:
    def test_linearity(self):
        a = dimension_from_c0(0.5e-12, 0.9, CM, UNIFORM, (23, 23))
        b = dimension_from_c0(1.0e-12, 0.9, CM, UNIFORM, (23, 23))
        assert a.aperture_l == b.aperture_l == 23
        assert (b.n_e - 1) == pytest.approx(2 * (a.n_e - 1), abs=1)

    def test_bartlett_doubles(self):
        u = dimension_from_c0(1e-12, 0.9, CM, UNIFORM, (20, 26))
        b = dimension_from_c0(1e-12, 0.9, CM, BARTLETT, (20, 26))
        assert u.aperture_l == b.aperture_l
        assert (b.n_e - 1) / (u.n_e - 1) == pytest.approx(2, rel=0.03)

    def test_table_ratio(self):
        shunt = layout_c0(29, 21, CM, UNIFORM)
        series = layout_c0(39, 24, CM, UNIFORM)
        assert shunt / series == pytest.approx(0.6447368421052632, rel=1e-12)

    def test_reproduces_stored_c0(self):
        lay = dimension_from_c0(0.93e-12, 0.91, CM, BARTLETT, (20, 26))
        assert layout_c0(lay.n_e, lay.aperture_l, CM, lay.window) == lay.c0
        assert lay.c0 == pytest.approx(0.93e-12, rel=0.02)

    def test_moves_aperture_when_needed(self):
        # tiny capacitance: 2 electrodes at mid aperture overshoot, a shorter aperture fits
        target = 1 * CM.c_per_pair_per_length * 18
        lay = dimension_from_c0(target, 0.9, CM, UNIFORM, (10, 30))
        assert lay.n_e == 2
        assert lay.aperture_l == pytest.approx(18)

    def test_unreachable(self):
        with pytest.raises(SawLadderError, match="nearest achievable"):
            dimension_from_c0(1e-17, 0.9, CM, UNIFORM, (20, 26))

    @settings(max_examples=50, deadline=None)
    @given(c0=st.floats(0.2e-12, 3e-12))
    def test_within_tolerance(self, c0):
        lay = dimension_from_c0(c0, 0.9, CM, BARTLETT, (20, 26))
        assert abs(lay.c0 - c0) / c0 <= 0.02
        assert lay.c0 == layout_c0(lay.n_e, lay.aperture_l, CM, BARTLETT)
