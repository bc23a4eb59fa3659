import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sawladder.errors import SawLadderError
from sawladder.mbvd import (MbvdModel, MotionalBranch, admittance, branch_admittance,
                            resonator_figures, scale_c0, scale_to_frequency, static_admittance,
                            with_quality)
from sawladder.netcore import make_grid

REF = MbvdModel(c_0=500e-15, r_s=2.0, branches=(MotionalBranch(1.0, 80e-9, 17e-15),))
# 1/(2 pi sqrt(80 nH * 17 fF))
REF_FS = 4315694333.628378


def lossless(c_m_over_c0=0.034, c_0=500e-15, f_s=4.3e9):
    return MbvdModel.from_figures(f_s, math.pi ** 2 / 8 * c_m_over_c0, math.inf, c_0)


valid_models = st.builds(
    lambda fs, k2, q, c0, rs, r0: MbvdModel.from_figures(fs, k2, q, c0, rs, r0),
    st.floats(1e8, 1e10), st.floats(0.001, 0.19), st.floats(10, 1e4),
    st.floats(1e-14, 1e-11), st.floats(0, 10, allow_subnormal=False),
    st.floats(0, 10, allow_subnormal=False))


class TestTypes:
    def test_branch_rejects_nonpositive(self):
        with pytest.raises(SawLadderError):
            MotionalBranch(1, 0, 1e-15)
        with pytest.raises(SawLadderError):
            MotionalBranch(-1, 1e-9, 1e-15)

    def test_model_needs_branch_and_c0(self):
        with pytest.raises(SawLadderError):
            MbvdModel(c_0=1e-12, branches=())
        with pytest.raises(SawLadderError):
            MbvdModel(c_0=0, branches=(MotionalBranch(1, 1e-9, 1e-15),))

    def test_duplicate_resonances_rejected(self):
        b = MotionalBranch(1, 80e-9, 17e-15)
        with pytest.raises(SawLadderError, match="distinct"):
            MbvdModel(c_0=1e-12, branches=(b, MotionalBranch(2, 80e-9, 17e-15)))

    def test_dict_round_trip(self):
        assert MbvdModel.from_dict(REF.to_dict()) == REF


class TestAdmittance:
    def test_static_capacitor_limit(self):
        # far below resonance the motional branch is just c_m in parallel with c_0
        m = REF
        grid = make_grid(REF_FS / 1e5, REF_FS / 1000, 20)
        y = admittance(m, grid).y
        np.testing.assert_allclose(y, 1j * grid.omega * (m.c_0 + m.main.c_m), rtol=1e-3)
        assert np.all(np.abs(y / (1j * grid.omega * m.c_0) - 1) > 0.03)

    def test_lossless_series_resonance_flagged(self):
        m = MbvdModel(c_0=500e-15, branches=(MotionalBranch(0.0, 80e-9, 17e-15),))
        f_s = m.main.f_s
        grid = make_grid(f_s * 0.99, f_s * 1.01, 3)
        assert grid.f[1] == pytest.approx(f_s, rel=1e-15)
        r = admittance(m, make_grid(f_s * 0.99, f_s, 3))
        assert r.singular[-1]
        assert not r.singular[:-1].any()

    def test_peak_matches_closed_form(self):
        assert REF.main.f_s == pytest.approx(REF_FS, rel=1e-12)
        grid = make_grid(4.0e9, 4.8e9, 801)
        y = np.abs(admittance(REF, grid).y)
        step = grid.f[1] - grid.f[0]
        assert abs(grid.f[np.argmax(y)] - REF_FS) <= step

    @pytest.mark.parametrize("q", [431, 688, 893, 1522])
    def test_peak_pulled_by_static_capacitance(self, q):
        # |Y_m + j w c_0| peaks where X = -w c_0 r_m^2, i.e. f_s (1 - c_0 / (2 c_m q^2))
        l_m, c_m, c_0 = 80e-9, 17e-15, 500e-15
        m = MbvdModel(c_0=c_0, branches=(MotionalBranch(math.sqrt(l_m / c_m) / q, l_m, c_m),))
        f_s = m.main.f_s
        grid = make_grid(f_s * 0.999, f_s * 1.001, 200001)
        peak = grid.f[np.argmax(np.abs(admittance(m, grid).y))]
        predicted = -f_s * c_0 / (2 * c_m * q ** 2)
        assert (peak - f_s) == pytest.approx(predicted, rel=0.02)

    def test_compositional(self):
        m = MbvdModel(c_0=400e-15, r_s=1.5, r_0=0.7, branches=(
            MotionalBranch(1.2, 80e-9, 17e-15), MotionalBranch(8.0, 70e-9, 1.5e-15)))
        grid = make_grid(4e9, 5e9, 101)
        w = grid.omega
        parts = static_admittance(m, w) + sum(branch_admittance(b, w) for b in m.branches)
        expected = 1 / (m.r_s + 1 / parts)
        np.testing.assert_allclose(admittance(m, grid).y, expected, rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(m=valid_models)
    def test_real_part_non_negative(self, m):
        f_s = m.main.f_s
        grid = make_grid(f_s * 0.5, f_s * 1.5, 301)
        assert np.all(admittance(m, grid).y.real >= -1e-15)


class TestFigures:
    def test_closed_form_series_resonance(self):
        assert resonator_figures(REF).f_s == pytest.approx(4.3157e9, rel=1e-4)

    def test_single_branch_parallel_and_k2(self):
        fig = resonator_figures(lossless(0.034))
        assert fig.f_p / fig.f_s == pytest.approx(1.0168579055108928, rel=1e-9)
        assert fig.k2 == pytest.approx(0.041945818704629774, rel=1e-12)

    def test_q_inversion(self):
        l_m, c_m = 80e-9, 17e-15
        r_m = math.sqrt(l_m / c_m) / 1522
        b = MotionalBranch(r_m, l_m, c_m)
        assert b.q == pytest.approx(1522, rel=1e-12)
        assert b.q == pytest.approx(2 * math.pi * b.f_s * l_m / r_m, rel=1e-12)

    def test_lossless_q_is_infinite(self):
        assert math.isinf(resonator_figures(lossless()).q)

    def test_multibranch_fp_below_next_pole(self):
        m = MbvdModel(c_0=500e-15, branches=(
            MotionalBranch(1, 80e-9, 17e-15), MotionalBranch(5, 75e-9, 1e-15)))
        fig = resonator_figures(m)
        spur = m.branches[1].f_s
        assert fig.f_s < fig.f_p < spur
        # susceptance of the lossless model vanishes at f_p
        w = 2 * math.pi * fig.f_p
        b = w * m.c_0 + sum(1 / (1 / (w * br.c_m) - w * br.l_m) for br in m.branches)
        assert abs(b) < 1e-9 * w * m.c_0

    @settings(max_examples=60, deadline=None)
    @given(m=valid_models)
    def test_fs_below_fp(self, m):
        fig = resonator_figures(m)
        assert 0 < fig.f_s < fig.f_p
        assert 0 < fig.k2 < 1
        single = fig.f_s * math.sqrt(1 + m.main.c_m / m.c_0)
        assert fig.f_p == pytest.approx(single, rel=1e-9)


class TestScaling:
    def test_frequency_identity(self):
        assert scale_to_frequency(REF, REF.main.f_s) == REF

    def test_halving_quadruples_inductance(self):
        out = scale_to_frequency(REF, REF.main.f_s / 2)
        assert out.main.l_m == pytest.approx(4 * REF.main.l_m, rel=1e-12)
        assert out.main.c_m == REF.main.c_m
        assert out.main.f_s == pytest.approx(REF.main.f_s / 2, rel=1e-12)

    def test_frequency_scaling_keeps_q_and_k2(self):
        m = MbvdModel(c_0=500e-15, r_s=2, branches=(
            MotionalBranch(1, 80e-9, 17e-15), MotionalBranch(5, 75e-9, 1e-15)))
        out = scale_to_frequency(m, 4.0e9)
        a, b = resonator_figures(m), resonator_figures(out)
        assert b.f_s == pytest.approx(4.0e9, rel=1e-15)
        assert b.k2 == pytest.approx(a.k2, rel=1e-12)
        for old, new in zip(m.branches, out.branches):
            assert new.q == pytest.approx(old.q, rel=1e-12)

    def test_c0_identity(self):
        assert scale_c0(REF, REF.c_0) == REF

    def test_c0_doubling_doubles_admittance(self):
        grid = make_grid(4e9, 4.6e9, 301)
        y1 = admittance(REF, grid).y
        y2 = admittance(scale_c0(REF, 2 * REF.c_0), grid).y
        np.testing.assert_allclose(y2, 2 * y1, rtol=1e-12)

    @pytest.mark.parametrize("rho", [0.1, 0.5, 2, 10])
    def test_figures_invariant(self, rho):
        a = resonator_figures(REF)
        b = resonator_figures(scale_c0(REF, rho * REF.c_0))
        for name in ("f_s", "f_p", "q", "k2"):
            assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(m=valid_models, rho=st.floats(0.01, 100))
    def test_c0_round_trip(self, m, rho):
        back = scale_c0(scale_c0(m, rho * m.c_0), m.c_0)
        for x, y in ((back.c_0, m.c_0), (back.r_s, m.r_s), (back.r_0, m.r_0),
                     (back.main.r_m, m.main.r_m), (back.main.l_m, m.main.l_m),
                     (back.main.c_m, m.main.c_m)):
            assert x == pytest.approx(y, rel=1e-12, abs=0)

    def test_with_quality(self):
        out = with_quality(REF, 688)
        assert out.main.q == pytest.approx(688, rel=1e-12)
        assert out.main.l_m == REF.main.l_m
