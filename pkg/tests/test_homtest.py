import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdcovtest.exceptions import DataError, DegenerateDataError
from hdcovtest.homtest import (
    BlockPartition,
    block_tests,
    box_m,
    box_m_correction,
    default_partition,
    dimension_condition,
    explicit_partition,
    lk_from_quadforms,
    lk_test,
    rejection_region,
    rho_factor,
)
from hdcovtest.procsim import AR1, sample_group, substream
from hdcovtest.quadform import quad_form


def random_groups(rng, k=3, n=(8, 12, 10), p=6):
    return [rng.normal(size=(ni, p)) * rng.uniform(0.5, 2.0) for ni in n[:k]]


class TestRho:
    def test_balanced_example(self):
        expected = 1 / (1 + (3 / 99 - 1 / 297) / 6)
        assert rho_factor([100, 100, 100]) == pytest.approx(expected, rel=1e-15)
        assert rho_factor([100, 100, 100]) == pytest.approx(0.995531, abs=1e-6)

    def test_smallest(self):
        assert rho_factor([2, 2]) == pytest.approx(2 / 3, rel=1e-15)

    def test_limit_and_monotone(self):
        prev = 0.0
        for n in (3, 5, 10, 50, 100, 1000, 10**6):
            r = rho_factor([n, n + 1, n + 2])
            assert 0 < r < 1
            assert r > prev
            prev = r
        assert prev == pytest.approx(1.0, abs=1e-6)

    def test_invalid(self):
        with pytest.raises(ValueError):
            rho_factor([1, 5])
        with pytest.raises(ValueError):
            rho_factor([5])


class TestLk:
    def test_equal_forms(self):
        assert lk_from_quadforms([2.5, 2.5, 2.5], [4, 9, 7]) == 0.0

    def test_hand_example(self):
        v = (1 + mpmath.e**2) / 2
        expected = float(2 * mpmath.log(v) + 2 * mpmath.log(v / mpmath.e**2))
        assert lk_from_quadforms([1.0, math.exp(2.0)], [3, 3]) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(1.73512332193211, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateDataError) as info:
            lk_from_quadforms([1.0, 0.0, 2.0], [5, 5, 5])
        assert info.value.group == 1

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(1e-6, 1e6), min_size=2, max_size=6),
        st.integers(2, 200),
    )
    def test_jensen_and_scale(self, qf, n0):
        n = [n0 + i for i in range(len(qf))]
        L = lk_from_quadforms(qf, n)
        assert L >= -1e-9
        assert lk_from_quadforms([1e3 * s for s in qf], n) == pytest.approx(L, abs=1e-8)


class TestLkTest:
    def test_identical_groups(self):
        X = np.random.default_rng(0).normal(size=(15, 40))
        res = lk_test([X, X.copy(), X.copy()])
        assert res.statistic == 0.0
        assert res.p_value == 1.0
        assert not res.reject
        assert res.df == 2
        assert res.scaled_statistic == res.scale_factor * res.statistic

    def test_fields(self):
        rng = np.random.default_rng(1)
        groups = random_groups(rng)
        res = lk_test(groups, alpha=0.05, mode="region")
        qf = [quad_form(g) for g in groups]
        assert res.group_quadforms == tuple(qf)
        assert res.pooled == pytest.approx(sum((g.shape[0] - 1) * s for g, s in zip(groups, qf)) / 27)
        assert res.region == rejection_region(0.05, 2)
        lo, hi = res.region
        assert res.reject == (res.scaled_statistic < lo or res.scaled_statistic > hi)
        assert res.warnings  # p=6 is far below the dimension advisory threshold

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        groups = random_groups(rng, p=20)
        base = lk_test(groups).statistic
        for c in (1e-3, 1e3):
            assert abs(lk_test([c * g for g in groups]).statistic - base) <= 1e-8

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        groups = random_groups(rng, p=12)
        a = lk_test(groups)
        b = lk_test(groups[::-1])
        assert b.statistic == pytest.approx(a.statistic, rel=1e-13)
        assert b.scale_factor == a.scale_factor
        assert b.p_value == pytest.approx(a.p_value, rel=1e-12)
        assert b.group_quadforms == a.group_quadforms[::-1]

    def test_selector_rules(self):
        X = np.random.default_rng(4).normal(size=(6, 4))
        with pytest.raises(ValueError, match="zero"):
            lk_test([X, X + 1], y=np.zeros(4))
        with pytest.raises(ValueError, match="expert"):
            lk_test([X, 2 * X], y=[1.0, 2.0, 0.0, 0.5])
        res = lk_test([X, 2 * X], y=[1.0, 2.0, 0.0, 0.5], expert=True)
        assert res.statistic > 0

    def test_k_less_than_two(self):
        with pytest.raises(DataError):
            lk_test([np.ones((3, 3))])

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            lk_test([np.random.rand(4, 3), np.random.rand(4, 5)])

    def test_constant_group_is_degenerate(self):
        X = np.random.default_rng(5).normal(size=(6, 4))
        with pytest.raises(DegenerateDataError):
            lk_test([X, np.ones((6, 4))])

    def test_upper_tail_decision_at_paper_value(self):
        # scaled statistic 15.1066 with df=2 -> p ~ 0.0005 -> reject
        from hdcovtest.homtest import _decide

        p, region, reject = _decide(15.1066, 2, 0.05, "upper")
        assert p == pytest.approx(0.0005, abs=5e-5)
        assert reject and region is None

    def test_unknown_mode(self):
        X = np.random.default_rng(6).normal(size=(6, 4))
        with pytest.raises(ValueError):
            lk_test([X, 2 * X], mode="lower")


class TestRegion:
    def test_df2(self):
        lo, hi = rejection_region(0.05, 2)
        assert lo == pytest.approx(2 * math.log(1 / 0.975), abs=1e-9)
        assert hi == pytest.approx(2 * math.log(40), abs=1e-9)

    def test_df1(self):
        z_lo = float(mpmath.sqrt(2) * mpmath.erfinv(mpmath.mpf("0.025")))
        z_hi = float(mpmath.sqrt(2) * mpmath.erfinv(mpmath.mpf("0.975")))
        lo, hi = rejection_region(0.05, 1)
        assert lo == pytest.approx(z_lo**2, rel=1e-8)
        assert hi == pytest.approx(z_hi**2, rel=1e-9)
        assert lo == pytest.approx(0.000982, abs=1e-6)
        assert hi == pytest.approx(5.02389, abs=1e-5)

    def test_shrinks(self):
        lo, hi = rejection_region(1e-10, 2)
        assert lo < 1e-9 and hi > 45

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2])
    def test_invalid(self, alpha):
        with pytest.raises(ValueError):
            rejection_region(alpha, 2)


class TestPartition:
    def test_example_two(self):
        part = default_partition(350, 101)
        assert part.boundaries == (100, 200, 300, 350)
        assert part.m == 4

    def test_small(self):
        assert default_partition(5, 3).boundaries == (2, 4, 5)

    def test_single_block(self):
        assert default_partition(10, 11).boundaries == (10,)
        assert default_partition(4, 50).boundaries == (4,)

    def test_selectors_cover(self):
        part = default_partition(23, 6)
        ys = list(part.selectors())
        total = np.sum(ys, axis=0)
        np.testing.assert_array_equal(total, np.ones(23))
        for y, sl in zip(ys, part.slices()):
            assert y[sl].all() and y.sum() == sl.stop - sl.start

    def test_invalid(self):
        with pytest.raises(ValueError):
            default_partition(10, 2)
        with pytest.raises(ValueError):
            BlockPartition((3, 3, 5))
        with pytest.raises(ValueError):
            explicit_partition([2, 4], 5)


class TestBlocks:
    def test_identical_groups(self):
        X = np.random.default_rng(7).normal(size=(11, 35))
        res = block_tests([X, X.copy(), X.copy()])
        assert res.partition.boundaries == (10, 20, 30, 35)
        assert all(b.statistic == 0.0 for b in res.blocks)
        assert not res.reject and res.rejected_blocks == []

    def test_single_block_matches_lk(self):
        rng = np.random.default_rng(8)
        groups = random_groups(rng, p=9)
        single = block_tests(groups, BlockPartition((9,)))
        direct = lk_test(groups)
        b = single.blocks[0]
        assert b.statistic == direct.statistic
        assert b.p_value == direct.p_value
        assert b.group_quadforms == direct.group_quadforms
        assert single.reject == direct.reject

    def test_block_equals_indicator_selector(self):
        rng = np.random.default_rng(9)
        groups = random_groups(rng, p=14)
        part = explicit_partition([5, 9, 14], 14)
        res = block_tests(groups, part)
        for b, y in zip(res.blocks, part.selectors()):
            assert b.statistic == pytest.approx(lk_test(groups, y=y).statistic, rel=1e-13)

    def test_degenerate_block_reported(self):
        rng = np.random.default_rng(10)
        groups = [rng.normal(size=(6, 8)) for _ in range(3)]
        groups[1][:, 4:] = 1.0
        res = block_tests(groups, explicit_partition([4, 8], 8))
        assert res.blocks[0] is not None and res.blocks[1] is None
        assert 1 in res.errors

    def test_localizes_perturbed_block(self):
        # groups differ only in coordinates 301-350 (variance tripled in group 3)
        hits = 0
        for rep in range(20):
            rng = substream(99, rep)
            groups = [sample_group(AR1(0.4), "gaussian", 101, 350, rng) for _ in range(3)]
            groups[2][:, 300:] *= math.sqrt(3.0)
            res = block_tests(groups)
            hits += 3 in res.rejected_blocks
        assert hits == 20


class TestBoxM:
    def test_identical_groups(self):
        X = np.random.default_rng(11).normal(size=(12, 3))
        res = box_m([X, X.copy(), X.copy()])
        assert abs(res.statistic) < 1e-10
        assert res.df == 2 * 3 * 4 // 2

    def test_scalar_case_equals_lk(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            groups = [rng.normal(scale=rng.uniform(0.3, 3), size=(rng.integers(3, 30), 1)) for _ in range(3)]
            assert abs(box_m(groups).statistic - lk_test(groups).statistic) <= 1e-8

    def test_correction_value(self):
        phi = box_m_correction(1, [100, 100, 100])
        assert phi == pytest.approx(1 - 4 / 24 * (3 / 99 - 1 / 297), rel=1e-15)
        assert phi == pytest.approx(0.995511, abs=1e-6)

    def test_correction_general_p(self):
        # cross-check: algebraically 1 - (2p^2+3p-1)/(6(p+1)(k-1)) * spread
        from fractions import Fraction as F

        p, n = 4, [10, 12, 15]
        spread = sum(F(1, m - 1) for m in n) - F(1, sum(n) - 3)
        exact = 1 - F(2 * p * p + 3 * p - 1, 6 * (p + 1) * 2) * spread
        assert box_m_correction(p, n) == pytest.approx(float(exact), rel=1e-14)

    def test_matches_determinant_formula(self):
        rng = np.random.default_rng(13)
        groups = [rng.normal(size=(n, 4)) for n in (10, 14, 20)]
        covs = [np.cov(g, rowvar=False) for g in groups]
        dfs = [g.shape[0] - 1 for g in groups]
        S = sum(d * c for d, c in zip(dfs, covs)) / sum(dfs)
        M = sum(dfs) * np.log(np.linalg.det(S)) - sum(d * np.log(np.linalg.det(c)) for d, c in zip(dfs, covs))
        assert box_m(groups).statistic == pytest.approx(M, rel=1e-10)

    def test_singular_case(self):
        with pytest.raises(DataError, match="singular"):
            box_m([np.random.rand(5, 5), np.random.rand(8, 5)])


class TestDimensionCondition:
    def test_not_satisfied(self):
        rep = dimension_condition(1000, 10, r=4, c=1)
        assert rep.threshold == 1e6
        assert not rep.satisfied
        assert rep.warning() is not None

    def test_boundary(self):
        rep = dimension_condition(729, 3, r=4, c=1)
        assert rep.threshold == 729.0
        assert rep.satisfied and rep.warning() is None

    def test_exponent_limit(self):
        rep = dimension_condition(1, 2, r=1e9, c=1)
        assert rep.threshold == pytest.approx(8.0, rel=1e-6)

    def test_group_threshold(self):
        rep = dimension_condition(100, 10, r=4, c=1)
        assert rep.group_threshold == 100.0 and rep.group_satisfied

    def test_invalid_r(self):
        with pytest.raises(ValueError):
            dimension_condition(100, 10, r=2)
