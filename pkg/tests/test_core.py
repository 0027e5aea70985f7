import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from extremoboot.core import (
    BlockScheme,
    EmpiricalQuantile,
    Fixed,
    OrderStatistic,
    OrthantSetPair,
    TimeSeries,
    estimate_threshold,
    estimate_vn,
    exceedance_indicators,
    partition_blocks,
    read_series_csv,
    write_series_csv,
)
from extremoboot.errors import DegenerateThresholdError

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestTimeSeries:
    def test_values_are_read_only(self):
        ts = TimeSeries([1.0, 2.0])
        with pytest.raises(ValueError):
            ts.values[0] = 5.0

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="NaN"):
            TimeSeries([1.0, np.nan])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            TimeSeries([])

    def test_single_column_collapses(self):
        ts = TimeSeries(np.ones((4, 1)))
        assert ts.dim == 1 and ts.values.shape == (4,)

    def test_vector_dim(self):
        assert TimeSeries(np.ones((4, 3))).dim == 3

    def test_effective_length(self):
        assert TimeSeries(np.arange(12.0)).effective_length(2) == 10
        with pytest.raises(ValueError):
            TimeSeries(np.arange(3.0)).effective_length(3)

    def test_csv_roundtrip(self, tmp_path, rng):
        x = rng.standard_t(3, size=50)
        write_series_csv(x, tmp_path / "s.csv")
        np.testing.assert_array_equal(read_series_csv(tmp_path / "s.csv").values, x)

    def test_csv_roundtrip_vector_with_header(self, tmp_path, rng):
        x = rng.standard_normal((20, 2))
        write_series_csv(x, tmp_path / "s.csv", header=True)
        assert (tmp_path / "s.csv").read_text().splitlines()[0] == "x1,x2"
        np.testing.assert_array_equal(read_series_csv(tmp_path / "s.csv", header=True).values, x)


class TestBlockScheme:
    def test_partial_last_block_excluded(self):
        s = partition_blocks(10, 3)
        assert s.block_count == 3
        assert [list(r) for r in s.ranges()] == [[0, 1, 2], [3, 4, 5], [6, 7, 8]]
        assert list(s.excluded) == [9]

    def test_single_block(self):
        s = partition_blocks(np.arange(10.0), 10)
        assert s.block_count == 1 and not s.excluded

    def test_desk_scale_block_count(self):
        assert BlockScheme(2000, 100).block_count == 20

    @pytest.mark.parametrize("r", [0, 11])
    def test_invalid_block_length(self, r):
        with pytest.raises(ValueError):
            BlockScheme(10, r)

    @given(st.integers(1, 300), st.integers(1, 300))
    def test_blocks_are_disjoint_and_cover_prefix(self, n, r):
        if r > n:
            r, n = n, r
        s = BlockScheme(n, r)
        covered = [i for rg in s.ranges() for i in rg]
        assert covered == list(range(s.covered))
        assert s.covered + len(s.excluded) == n
        assert len(s.excluded) < r

    def test_block_sums(self):
        s = BlockScheme(7, 3)
        np.testing.assert_array_equal(s.block_sums(np.arange(7)), [3, 12])


class TestThresholds:
    def test_order_statistic(self):
        assert estimate_threshold(np.arange(1.0, 11.0), OrderStatistic(5)) == 8.0

    def test_empirical_quantile(self):
        assert estimate_threshold(np.arange(1.0, 101.0), EmpiricalQuantile(0.05)) == 95.0

    def test_fixed_passthrough(self, rng):
        assert estimate_threshold(rng.standard_normal(10), Fixed(1.7)) == 1.7

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            OrderStatistic(0)
        with pytest.raises(ValueError):
            EmpiricalQuantile(1.0)
        with pytest.raises(DegenerateThresholdError):
            Fixed(-1.0)

    def test_non_positive_estimate(self):
        with pytest.raises(DegenerateThresholdError):
            estimate_threshold(-np.arange(1.0, 11.0), EmpiricalQuantile(0.1))

    def test_uses_only_first_n(self):
        x = np.concatenate([np.arange(1.0, 101.0), [1e9] * 10])
        assert estimate_threshold(x, EmpiricalQuantile(0.05), n=100) == 95.0

    def test_vector_quantile_uses_coordinatewise_max(self):
        x = np.column_stack([np.arange(1.0, 101.0), np.zeros(100)])
        assert estimate_threshold(x, EmpiricalQuantile(0.05)) == 95.0

    def test_order_statistic_uses_max_norm(self):
        x = -np.arange(1.0, 11.0)
        assert estimate_threshold(x, OrderStatistic(5)) == 8.0

    @given(arrays(np.float64, st.integers(20, 200), elements=st.floats(0.01, 1e3)), st.floats(0.01, 0.5))
    def test_quantile_matches_sort_oracle(self, x, p):
        j = max(1, math.ceil(round((1 - p) * x.size, 9)))
        assert estimate_threshold(x, EmpiricalQuantile(p)) == oracles.order_stat(list(x), j)

    @given(arrays(np.float64, st.integers(20, 200), elements=st.floats(0.01, 1e3)), st.integers(-4, 4))
    def test_scale_equivariance(self, x, e):
        c = 2.0**e  # exact scaling
        for spec in (EmpiricalQuantile(0.1), OrderStatistic(4)):
            assert estimate_threshold(x * c, spec) == c * estimate_threshold(x, spec)


class TestExceedances:
    def test_hand_example(self):
        x = [2, 3, 0.5, 2.5, 2.6]
        marg, joint = exceedance_indicators(x, 1.0, OrthantSetPair(), lag=1, n=4)
        ref_m, ref_j = oracles.indicators(x, 1.0, 1, 4)
        assert marg.tolist() == ref_m == [1, 1, 0, 1]
        assert joint.tolist() == ref_j == [1, 0, 0, 1]

    def test_no_exceedances(self):
        marg, joint = exceedance_indicators([0.1, 0.2, 0.3], 1.0, OrthantSetPair(), lag=1)
        assert not marg.any() and not joint.any()

    def test_membership_is_strict(self):
        marg, _ = exceedance_indicators([1.0, 1.0 + 1e-12], 1.0, OrthantSetPair(), lag=0)
        assert marg.tolist() == [0, 1]

    def test_lag_zero_joint_equals_marginal(self, rng):
        x = rng.standard_t(3, 200)
        marg, joint = exceedance_indicators(x, 1.5, OrthantSetPair(), lag=0)
        np.testing.assert_array_equal(marg, joint)

    def test_too_short(self):
        with pytest.raises(ValueError):
            exceedance_indicators([1.0, 2.0], 1.0, OrthantSetPair(), lag=2, n=1)

    def test_vector_orthant(self):
        x = np.array([[2.0, 2.0], [2.0, 0.5], [3.0, 1.5]])
        pair = OrthantSetPair(lower_A=[1.0, 1.0], lower_B=[1.0, 1.0])
        marg, _ = exceedance_indicators(x, 1.0, pair, lag=0)
        assert marg.tolist() == [1, 0, 1]

    def test_scaled_pair(self):
        pair = OrthantSetPair().scaled(2.0)
        assert pair.in_A(np.array([1.5, 2.5]), 1.0).tolist() == [False, True]
        assert pair == OrthantSetPair(scale=2.0) and hash(pair) == hash(OrthantSetPair(scale=2.0))

    @given(arrays(np.float64, st.integers(2, 60), elements=finite), st.floats(0.1, 10), st.integers(0, 5))
    def test_joint_implies_marginal(self, x, a, lag):
        if lag >= x.size:
            return
        marg, joint = exceedance_indicators(x, a, OrthantSetPair(), lag)
        assert np.all(joint <= marg)


class TestEstimateVn:
    def test_hand_example(self):
        assert estimate_vn([2, 0.5, 3, 0.1], 1.0, 1.0) == 0.5

    def test_extremes(self):
        assert estimate_vn([2.0, 3.0], 1.0, 1.0) == 1.0
        assert estimate_vn([0.2, 0.3], 1.0, 1.0) == 0.0
