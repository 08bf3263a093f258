import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rateregion.rate_core import (
    BoundaryRate,
    ConstraintViolation,
    Direction,
    DomainError,
    GeneralRateModel,
    LinearFractional,
    PowerAllocation,
    RateRegionError,
    SelectorError,
    as_linear_fractional,
    dl_boundary,
    rate_pair,
    sample_boundary,
    ul_boundary_segment,
)

from conftest import interference_model

coef = st.floats(0.01, 100.0)
pos = st.floats(1e-3, 1.0)


def models(direction):
    return st.builds(
        lambda *c: GeneralRateModel(*c, direction=direction), coef, coef, coef, coef, coef, coef
    )


# Golden values from a 40-digit mpmath evaluation of the rate equations.
GOLD_DL_HALF = (0.4694852833012202025, 0.8231222379159207119)
GOLD_UL_SEG2_HALF = (0.2837929660005912351, 1.2801079191927353008)


class TestModel:
    def test_rejects_negative_and_non_finite(self):
        with pytest.raises(RateRegionError, match="mu12"):
            GeneralRateModel(1, 1, 0, -1, 0, 0)
        with pytest.raises(RateRegionError, match="alpha1"):
            GeneralRateModel(math.inf, 1, 0, 0, 0, 0)

    def test_direction_parsing(self):
        assert GeneralRateModel(1, 1, 0, 0, 0, 0, "UL").direction is Direction.UL
        with pytest.raises(RateRegionError):
            GeneralRateModel(1, 1, 0, 0, 0, 0, "sideways")

    def test_swap_is_involution(self):
        m = GeneralRateModel(1, 2, 3, 4, 5, 6, "ul")
        assert m.swapped().swapped() == m
        assert m.swapped() == GeneralRateModel(2, 1, 6, 5, 4, 3, "ul")


class TestRatePair:
    def test_single_user_corner(self):
        r1, r2 = rate_pair(interference_model(1.0, "dl"), PowerAllocation(1.0, 0.0))
        assert r1 == pytest.approx(math.log2(3.5), rel=1e-15)
        assert r1 == pytest.approx(1.8074, abs=1e-4)
        assert r2 == 0.0

    def test_zero_power(self):
        assert rate_pair(GeneralRateModel(3, 4, 1, 2, 3, 4, "ul"), PowerAllocation(0, 0)) == (0.0, 0.0)

    def test_golden_equal_split(self):
        r = rate_pair(interference_model(10.0, "dl"), PowerAllocation(0.5, 0.5))
        assert r == pytest.approx(GOLD_DL_HALF, rel=1e-14)

    @pytest.mark.parametrize(
        "alloc, direction, name",
        [((0.7, 0.7), "dl", "eta1 \\+ eta2"), ((1.2, 0.0), "ul", "eta1"), ((0.0, -0.1), "dl", "eta2")],
    )
    def test_constraint_violation_names_constraint(self, alloc, direction, name):
        with pytest.raises(ConstraintViolation, match=name):
            rate_pair(interference_model(1.0, direction), PowerAllocation(*alloc))

    def test_ul_allows_full_power_for_both(self):
        rate_pair(interference_model(1.0, "ul"), PowerAllocation(1.0, 1.0))

    @settings(max_examples=200, deadline=None)
    @given(models("ul"), pos, pos, st.floats(1.01, 3.0))
    def test_monotone_in_own_and_other_power(self, m, e1, e2, factor):
        r1, r2 = rate_pair(m, PowerAllocation(e1, e2))
        up1 = rate_pair(m, PowerAllocation(min(1.0, e1 * factor), e2))
        up2 = rate_pair(m, PowerAllocation(e1, min(1.0, e2 * factor)))
        assert r1 >= 0 and r2 >= 0
        if e1 * factor <= 1.0:
            assert up1[0] > r1
        assert up1[1] <= r2
        assert up2[0] <= r1
        if e2 * factor <= 1.0:
            assert up2[1] > r2

    @settings(max_examples=200, deadline=None)
    @given(models("dl"), pos, pos)
    def test_dl_dominance_of_full_budget(self, m, e1, e2):
        total = e1 + e2
        if total >= 1.0:
            e1, e2 = e1 / (2 * total), e2 / (2 * total)
            total = e1 + e2
        r = rate_pair(m, PowerAllocation(e1, e2))
        scaled = rate_pair(m, PowerAllocation(min(1.0, e1 / total), min(1.0, e2 / total)))
        assert scaled[0] >= r[0] - 1e-15 and scaled[1] >= r[1] - 1e-15

    @settings(max_examples=200, deadline=None)
    @given(models("ul"), st.floats(1e-3, 0.999), st.floats(1e-3, 0.999))
    def test_ul_dominance_of_full_power(self, m, e1, e2):
        delta = 1.0 / max(e1, e2)
        r = rate_pair(m, PowerAllocation(e1, e2))
        scaled = rate_pair(m, PowerAllocation(min(1.0, e1 * delta), min(1.0, e2 * delta)))
        assert scaled[0] >= r[0] - 1e-15 and scaled[1] >= r[1] - 1e-15


class TestBoundaries:
    def test_dl_endpoints(self):
        m = interference_model(1.0, "dl")
        assert dl_boundary(m, 1.0) == pytest.approx((1.8074, 0.0), abs=1e-4)
        r1, r2 = dl_boundary(m, 0.0)
        assert r1 == 0.0
        assert r2 == pytest.approx(math.log2(1 + m.alpha2 / (m.mu22 + 1)), rel=1e-15)
        assert r2 == pytest.approx(2.5850, abs=1e-4)

    def test_dl_matches_rate_pair(self):
        m = interference_model(10.0, "dl")
        for eta in np.linspace(0, 1, 11):
            assert dl_boundary(m, eta) == rate_pair(m, PowerAllocation(eta, 1 - eta))

    def test_dl_domain(self):
        with pytest.raises(DomainError):
            dl_boundary(interference_model(1.0, "dl"), 1.5)
        with pytest.raises(SelectorError):
            dl_boundary(interference_model(1.0, "ul"), 0.5)

    def test_ul_segments(self):
        m = interference_model(1.0, "ul")
        r1, r2 = ul_boundary_segment(m, 1, 0.0)
        assert r1 == pytest.approx(math.log2(1 + 5 / 2), rel=1e-15) and r2 == 0.0
        assert ul_boundary_segment(m, 1, 1.0) == ul_boundary_segment(m, 2, 1.0)

    def test_ul_segment2_golden(self):
        r = ul_boundary_segment(interference_model(10.0, "ul"), 2, 0.5)
        assert r == pytest.approx(GOLD_UL_SEG2_HALF, rel=1e-14)

    def test_ul_domain(self):
        m = interference_model(1.0, "ul")
        with pytest.raises(DomainError):
            ul_boundary_segment(m, 3, 0.5)
        with pytest.raises(DomainError):
            ul_boundary_segment(m, 1, -0.1)


class TestLinearFractional:
    def test_dl_r1_coefficients(self):
        lf = as_linear_fractional(GeneralRateModel(5, 10, 1, 1, 1, 1), BoundaryRate.DL_R1)
        assert (lf.p, lf.q, lf.r, lf.s) == (5, 2, 0, 2)
        eta = np.linspace(0, 1, 101)
        np.testing.assert_allclose(lf.rate(eta), dl_boundary(GeneralRateModel(5, 10, 1, 1, 1, 1), eta)[0], rtol=1e-14)

    def test_zero_gain_is_flat(self):
        lf = as_linear_fractional(GeneralRateModel(0, 10, 1, 3, 1, 1), "dl_r1")
        assert lf.p == lf.r and lf.q == lf.s
        assert lf.constant
        assert np.all(lf.rate(np.linspace(0, 1, 5)) == 0.0)

    def test_ul_seg1_r2(self):
        # 1 + 10 t / (t + 2) = (11 t + 2) / (t + 2)
        lf = as_linear_fractional(GeneralRateModel(5, 10, 1, 1, 1, 1, "ul"), "ul1_r2")
        assert (lf.p, lf.q, lf.r, lf.s) == (11, 2, 1, 2)
        t = np.linspace(0, 1, 101)
        np.testing.assert_allclose(lf(t), (11 * t + 2) / (t + 2), rtol=1e-15)

    def test_selector_direction(self):
        with pytest.raises(SelectorError):
            as_linear_fractional(interference_model(1.0, "dl"), "ul2_r1")

    def test_check_domain(self):
        LinearFractional(5, 2, 0, 2).check_domain()
        with pytest.raises(DomainError):
            LinearFractional(1, 1, -2, 1).check_domain()
        with pytest.raises(DomainError):
            LinearFractional(0, 1, 1, 1).check_domain()

    @settings(max_examples=100, deadline=None)
    @given(st.sampled_from(["dl", "ul"]), st.lists(st.floats(0.1, 10.0), min_size=6, max_size=6))
    def test_round_trip(self, direction, c):
        m = GeneralRateModel(*c, direction=direction)
        eta = np.linspace(0, 1, 1000)
        if direction == "dl":
            direct = dict(zip(("dl_r1", "dl_r2"), dl_boundary(m, eta)))
        else:
            r11, r12 = ul_boundary_segment(m, 1, eta)
            r21, r22 = ul_boundary_segment(m, 2, eta)
            direct = {"ul1_r1": r11, "ul1_r2": r12, "ul2_r1": r21, "ul2_r2": r22}
        for sel, expected in direct.items():
            lf = as_linear_fractional(m, sel)
            lf.check_domain()
            got = lf.rate(eta)
            # Rounding 1 - eta perturbs either form by eps * |dR/deta| <= ~3e-15
            # absolute for coefficients <= 10, which dominates near zero rate.
            np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-14)


class TestSampling:
    def test_dl_two_samples_are_corners(self):
        b = sample_boundary(interference_model(1.0, "dl"), 2)
        assert len(b.segments) == 1 and len(b) == 2
        assert list(b.segments[0].eta) == [0.0, 1.0]
        assert b.segments[0].r1[0] == 0.0 and b.segments[0].r2[1] == 0.0

    def test_ul_structure(self):
        b = sample_boundary(interference_model(1.0, "ul"), 3)
        assert [s.segment for s in b.segments] == ["bd1", "bd2"]
        assert len(b) == 6
        s1, s2 = b.segments
        assert (s1.r1[-1], s1.r2[-1]) == (s2.r1[-1], s2.r2[-1])

    def test_rejects_small_n(self):
        with pytest.raises(DomainError):
            sample_boundary(interference_model(1.0, "dl"), 1)

    @pytest.mark.parametrize("direction", ["dl", "ul"])
    @pytest.mark.parametrize("cross", [1.0, 10.0])
    def test_monotone(self, direction, cross):
        b = sample_boundary(interference_model(cross, direction), 201)
        for seg in b.segments:
            d1, d2 = np.diff(seg.r1), np.diff(seg.r2)
            assert (np.all(d1 > 0) and np.all(d2 < 0)) or (np.all(d1 < 0) and np.all(d2 > 0))

    def test_convex_dl_curve(self):
        b = sample_boundary(interference_model(1.0, "dl"), 201)
        seg = b.segments[0]
        assert len(seg) == 201
        assert seg.r1[-1] == pytest.approx(math.log2(3.5))
        assert seg.r2[0] == pytest.approx(math.log2(6))
