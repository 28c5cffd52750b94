import math

import numpy as np
import pytest
from scipy import stats as sstats

from crewsched.errors import DegenerateSamplesError
from crewsched.stats import betainc_regularized, paired_t_test, t_two_tailed_p, welch_t_test


class TestTTailClosedForms:
    """With one or two degrees of freedom the two-tailed t probability has a
    closed form (standard t-table entries), giving oracle values independent
    of the incomplete-beta implementation."""

    def test_df1_is_cauchy(self):
        for t in (0.5, 1.0, 2.0, 4.0, 12.7062):
            want = 1.0 - 2.0 / math.pi * math.atan(t)
            assert t_two_tailed_p(t, 1) == pytest.approx(want, abs=1e-12)

    def test_df1_table_entry(self):
        # |T| >= 1 with one degree of freedom is exactly 1/2
        assert t_two_tailed_p(1.0, 1) == pytest.approx(0.5, abs=1e-12)
        # |T| >= sqrt(3) is exactly 1/3
        assert t_two_tailed_p(math.sqrt(3), 1) == pytest.approx(1 / 3, abs=1e-12)

    def test_df2_closed_form(self):
        for t in (0.25, 1.0, math.sqrt(2), 3.0):
            want = 1.0 - t / math.sqrt(2.0 + t * t)
            assert t_two_tailed_p(t, 2) == pytest.approx(want, abs=1e-12)

    def test_zero_statistic_is_one(self):
        assert t_two_tailed_p(0.0, 5) == 1.0

    def test_matches_scipy_broadly(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            t = float(rng.uniform(-8, 8))
            df = float(rng.uniform(1, 200))
            want = 2 * sstats.t.sf(abs(t), df)
            assert t_two_tailed_p(t, df) == pytest.approx(want, abs=1e-12)

    def test_betainc_matches_scipy(self):
        rng = np.random.default_rng(5)
        from scipy.special import betainc

        for _ in range(200):
            a = float(rng.uniform(0.1, 30))
            b = float(rng.uniform(0.1, 30))
            x = float(rng.random())
            assert betainc_regularized(a, b, x) == pytest.approx(
                float(betainc(a, b, x)), abs=1e-12
            )


class TestPairedTTest:
    def test_published_exact_values(self):
        # diffs (0, 2): t = 1, df = 1 -> p = 1/2
        assert paired_t_test([2.0, 4.0], [2.0, 2.0]) == pytest.approx(0.5, abs=1e-6)
        # diffs symmetric around sqrt(2) with sd sqrt(3): t = sqrt(2)*sqrt(3)/sqrt(3) ...
        s2, s3 = math.sqrt(2), math.sqrt(3)
        p = paired_t_test([s2 - s3, s2, s2 + s3], [0.0, 0.0, 0.0])
        assert p == pytest.approx(1 - s2 / 2, abs=1e-6)

    def test_matches_scipy(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 30))
            a = rng.normal(size=n)
            b = rng.normal(size=n)
            want = sstats.ttest_rel(a, b).pvalue
            assert paired_t_test(list(a), list(b)) == pytest.approx(want, abs=1e-12)

    def test_identical_samples_degenerate(self):
        with pytest.raises(DegenerateSamplesError):
            paired_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])

    def test_constant_shift_degenerate(self):
        with pytest.raises(DegenerateSamplesError):
            paired_t_test([2.0, 3.0], [1.0, 2.0])

    def test_swapping_samples_preserves_p(self):
        a = [1.0, 4.0, 2.0, 8.0]
        b = [2.0, 3.0, 1.5, 9.0]
        assert paired_t_test(a, b) == pytest.approx(paired_t_test(b, a), abs=1e-15)

    def test_length_mismatch_rejected(self):
        with pytest.raises(DegenerateSamplesError):
            paired_t_test([1.0, 2.0], [1.0])


class TestWelchTTest:
    def test_published_exact_value_one_sample_reduction(self):
        # Constant second sample: Welch df reduces to n1 - 1 = 1 and
        # t = (mean(a) - c) / sqrt(var(a)/2) = -4; two-tailed Cauchy tail.
        p = welch_t_test([0.0, 2.0], [5.0, 5.0])
        want = 1.0 - 2.0 / math.pi * math.atan(4.0)
        assert p == pytest.approx(want, abs=1e-6)

    def test_matches_scipy(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            a = rng.normal(0, rng.uniform(0.5, 2), size=int(rng.integers(2, 30)))
            b = rng.normal(1, rng.uniform(0.5, 2), size=int(rng.integers(2, 30)))
            want = sstats.ttest_ind(a, b, equal_var=False).pvalue
            assert welch_t_test(list(a), list(b)) == pytest.approx(want, abs=1e-12)

    def test_identical_distributions_large_n_p_near_one_on_average(self):
        rng = np.random.default_rng(13)
        ps = []
        for _ in range(300):
            a = rng.normal(size=40)
            b = rng.normal(size=40)
            ps.append(welch_t_test(list(a), list(b)))
        # under the null, p is uniform: mean near 1/2, rarely tiny
        assert np.mean(ps) == pytest.approx(0.5, abs=0.06)
        assert min(ps) > 1e-6

    def test_disjoint_distributions_tiny_p(self):
        rng = np.random.default_rng(14)
        a = rng.normal(0, 1, size=30)
        b = rng.normal(100, 1, size=30)
        assert welch_t_test(list(a), list(b)) < 1e-10

    def test_symmetric_in_argument_order(self):
        a = [1.0, 2.0, 3.5]
        b = [2.0, 2.5, 4.0, 1.0]
        assert welch_t_test(a, b) == pytest.approx(welch_t_test(b, a), abs=1e-15)

    def test_degenerate_equal_constants(self):
        with pytest.raises(DegenerateSamplesError):
            welch_t_test([2.0, 2.0], [2.0, 2.0])

    def test_distinct_constants_give_zero(self):
        assert welch_t_test([2.0, 2.0], [3.0, 3.0]) == 0.0

    def test_too_small_samples_rejected(self):
        with pytest.raises(DegenerateSamplesError):
            welch_t_test([1.0], [2.0, 3.0])
