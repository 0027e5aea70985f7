import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from extremoboot.bootstrap import (
    SCHEMES,
    block_indices,
    bootstrap_extremogram,
    bootstrap_quantiles,
    ci_direct,
    ci_transfer,
    dmc_replicates,
    draw_blocks,
    modified_replicates,
    multiplier_bootstrap_extremogram,
    multiplier_replicates,
    read_replicates_csv,
    simultaneous_band,
    stationary_bootstrap_dmc,
    stationary_bootstrap_modified,
    wrap_index,
    write_replicates_csv,
)
from extremoboot.core import EmpiricalQuantile, OrthantSetPair, estimate_threshold
from extremoboot.errors import NoBandError, NoIntervalError
from extremoboot.extremogram import empirical_extremogram

PAIR = OrthantSetPair()
unit = st.floats(0, 1)


def _heavy(rng, n):
    return rng.standard_t(3, n)


class TestMultiplier:
    def test_zero_multipliers_restrict_to_blocks(self, rng):
        x = _heavy(rng, 98)  # n = 95 summands, 9 blocks of 10 cover 90
        rep = multiplier_bootstrap_extremogram(x, 1.0, PAIR, 3, 10, np.zeros(9))
        base = empirical_extremogram(x, 1.0, PAIR, 3, n=90).values
        np.testing.assert_array_equal(rep, base)

    def test_single_block_reproduces_base(self, rng):
        x = _heavy(rng, 53)
        rep = multiplier_bootstrap_extremogram(x, 1.0, PAIR, 3, 50, np.array([0.7]))
        np.testing.assert_allclose(rep, empirical_extremogram(x, 1.0, PAIR, 3).values, rtol=1e-15)

    def test_hand_arithmetic(self):
        # blocks {1, 2} and {3, 4} at lag 1: (joint, marginal) = (1, 2) and (1, 1)
        rep = multiplier_bootstrap_extremogram([2, 2, 0, 2, 2], 1.0, PAIR, 1, 2, np.array([1.0, -0.5]))
        assert rep[1] == pytest.approx(2.5 / 4.5, rel=1e-15)

    def test_zero_weighted_denominator_is_undefined(self):
        rep = multiplier_bootstrap_extremogram([2, 2, 0, 0, 0], 1.0, PAIR, 1, 2, np.array([-1.0, 0.3]))
        assert math.isnan(rep[1])

    def test_wrong_multiplier_count(self, rng):
        with pytest.raises(ValueError):
            multiplier_replicates(_heavy(rng, 53), 1.0, PAIR, 3, 10, np.zeros((2, 4)))

    @given(arrays(np.float64, st.integers(6, 50), elements=st.floats(-4, 4)), st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_matches_loop_oracle(self, x, r, seed):
        h_max = 2
        n = x.size - h_max
        if r > n:
            return
        m = n // r
        xi = np.random.default_rng(seed).standard_normal(m)
        got = multiplier_bootstrap_extremogram(x, 1.0, PAIR, h_max, r, xi)
        for h in range(h_max + 1):
            marg, joint = oracles.indicators(list(x), 1.0, h, m * r)
            num = sum((1 + xi[i // r]) * joint[i] for i in range(m * r))
            den = sum((1 + xi[i // r]) * marg[i] for i in range(m * r))
            if den == 0:
                assert math.isnan(got[h])
            else:
                assert got[h] == pytest.approx(num / den, rel=1e-9, abs=1e-9)


class TestStationaryIndices:
    def test_wrap_rule(self):
        assert int(wrap_index(6, 5)) == 3
        assert int(wrap_index(5, 5)) == 5
        assert int(wrap_index(6, 5, "circular")) == 1

    def test_wrap_invalid(self):
        with pytest.raises(ValueError):
            wrap_index(3, 5, "mirror")

    def test_mean_block_length(self):
        _, lengths = draw_blocks(10_000, 20, np.random.default_rng(12), size=10)
        assert lengths.min() >= 1
        assert lengths.mean() == pytest.approx(20, abs=0.5)

    def test_starts_uniform_support(self):
        starts, _ = draw_blocks(7, 2, np.random.default_rng(13), size=50)
        assert starts.min() == 1 and starts.max() == 7

    def test_full_single_block_is_identity(self):
        np.testing.assert_array_equal(block_indices(6, [1], [6]), [list(range(6))])
        np.testing.assert_array_equal(block_indices(6, [1], [40]), [list(range(6))])

    def test_hand_example(self):
        # blocks (K, L) = (4, 3), (2, 5) in a series of 5: X4 X5 X3 X2 X3 (truncated)
        np.testing.assert_array_equal(block_indices(5, [4, 2], [3, 5]), [[3, 4, 2, 1, 2]])

    def test_short_blocks_rejected(self):
        with pytest.raises(ValueError):
            block_indices(5, [1, 1], [2, 2])

    @given(st.integers(2, 40), st.integers(0, 2**32 - 1), st.sampled_from(["modular", "circular"]))
    def test_matches_resample_oracle(self, n, seed, wrap):
        g = np.random.default_rng(seed)
        starts, lengths = draw_blocks(n, 3.0, g, size=1)
        idx = block_indices(n, starts[0], lengths[0], wrap)[0]
        ref = oracles.resample(list(range(n)), starts[0].tolist(), lengths[0].tolist(), wrap == "modular")
        assert idx.tolist() == ref

    def test_dmc_resample_preserves_length(self, rng):
        x = _heavy(rng, 30)
        y = stationary_bootstrap_dmc(x, 5, rng)
        assert y.length == 30 and set(y.values) <= set(x)


class TestStationaryReplicates:
    def test_dmc_identity_resample(self, rng):
        x = _heavy(rng, 40)
        idx = np.arange(40)[None, :]
        np.testing.assert_array_equal(dmc_replicates(x, 1.0, PAIR, 3, idx)[0], empirical_extremogram(x, 1.0, PAIR, 3).values)

    def test_modified_single_full_block(self, rng):
        x = _heavy(rng, 40)
        idx = block_indices(37, [1], [37])
        np.testing.assert_array_equal(
            modified_replicates(x, 1.0, PAIR, 3, idx)[0], empirical_extremogram(x, 1.0, PAIR, 3).values
        )

    def test_modified_single_lag_function(self, rng):
        x = _heavy(rng, 40)
        v = stationary_bootstrap_modified(x, 2, 5, rng, 1.0)
        assert math.isnan(v) or 0 <= v <= 1

    def test_all_exceed_gives_one(self, rng):
        x = 2 + rng.random(30)
        idx = np.random.default_rng(1).integers(0, 28, size=(5, 28))
        np.testing.assert_array_equal(modified_replicates(x, 1.0, PAIR, 2, idx), np.ones((5, 3)))

    def test_no_exceedances_undefined(self, rng):
        idx = np.random.default_rng(1).integers(0, 28, size=(3, 28))
        assert np.all(np.isnan(modified_replicates(np.zeros(30), 1.0, PAIR, 2, idx)))

    def test_modified_wrong_index_width(self, rng):
        with pytest.raises(ValueError):
            modified_replicates(_heavy(rng, 30), 1.0, PAIR, 2, np.zeros((1, 30), dtype=int))

    @given(arrays(np.float64, st.integers(4, 40), elements=st.floats(-4, 4)), st.integers(0, 2**32 - 1))
    def test_modified_matches_loop_oracle(self, x, seed):
        h_max = 2
        n = x.size - h_max
        idx = np.random.default_rng(seed).integers(0, n, size=(3, n))
        got = modified_replicates(x, 1.0, PAIR, h_max, idx)
        for b in range(3):
            for h in range(h_max + 1):
                den = sum(1 for t in idx[b] if x[t] > 1)
                num = sum(1 for t in idx[b] if x[t] > 1 and x[t + h] > 1)
                if den == 0:
                    assert math.isnan(got[b, h])
                else:
                    assert got[b, h] == num / den

    @given(arrays(np.float64, st.integers(4, 40), elements=st.floats(-4, 4)), st.integers(0, 2**32 - 1))
    def test_dmc_matches_loop_oracle(self, x, seed):
        h_max = 2
        idx = np.random.default_rng(seed).integers(0, x.size, size=(2, x.size))
        got = dmc_replicates(x, 1.0, PAIR, h_max, idx)
        for b in range(2):
            ref = oracles.extremogram([x[t] for t in idx[b]], 1.0, h_max)
            np.testing.assert_array_equal(got[b], [math.nan if v is None else float(v) for v in ref])


class TestQuantiles:
    def test_small_example(self):
        # ranks ceil(0.25 * 4) = 1 and ceil(0.75 * 4) = 3
        assert bootstrap_quantiles([0.1, 0.2, 0.3, 0.4], 0.5)[:2] == (0.1, 0.3)

    def test_constant(self):
        assert bootstrap_quantiles([0.3] * 7, 0.05)[:2] == (0.3, 0.3)

    def test_uniform_concentration(self):
        lo, hi, _ = bootstrap_quantiles(np.random.default_rng(14).random(1000), 0.05)
        assert lo == pytest.approx(0.025, abs=0.02) and hi == pytest.approx(0.975, abs=0.02)

    def test_undefined_dropped(self):
        assert bootstrap_quantiles([np.nan, 0.1, 0.2, np.nan, 0.3, 0.4], 0.5) == (0.1, 0.3, 2)

    def test_all_undefined(self):
        with pytest.raises(NoIntervalError):
            bootstrap_quantiles([np.nan, np.nan], 0.05)

    def test_rounding_guard(self):
        # 0.975 * 200 evaluates to 195.00000000000003; the rank must be 195
        x = np.arange(1.0, 201.0)
        assert bootstrap_quantiles(x, 0.05)[:2] == (5.0, 195.0)

    @given(st.lists(st.one_of(unit, st.just(math.nan)), min_size=1, max_size=60), st.floats(0.01, 0.99))
    def test_matches_sort_oracle(self, reps, alpha):
        if all(math.isnan(v) for v in reps):
            return
        assert bootstrap_quantiles(reps, alpha) == oracles.quantiles(reps, alpha)


class TestIntervals:
    def test_direct(self):
        ci = ci_direct(0.3, 0.25, 0.5)
        assert (ci.lower, ci.upper) == pytest.approx((0.1, 0.35))

    def test_direct_lower_clipped(self):
        ci = ci_direct(0.1, 0.05, 0.4)
        assert ci.lower == 0.0 and ci.upper == pytest.approx(0.15)

    def test_degenerate(self):
        ci = ci_direct(0.4, 0.4, 0.4)
        assert (ci.lower, ci.upper) == (0.4, 0.4) and ci.width == 0 and ci.covers(0.4)

    def test_undefined_base(self):
        ci = ci_direct(math.nan, 0.1, 0.2)
        assert not ci.defined and not ci.covers(0.1)

    def test_transfer_hand_arithmetic(self):
        ci = ci_transfer(0.2, 0.35, 0.25, 0.45, 0.01, 0.05)
        c = math.sqrt(5)
        assert ci.lower == 0.0
        assert ci.upper == pytest.approx(0.2 + 0.1 * c, rel=1e-15)
        assert ci.upper == pytest.approx(0.4236, abs=1e-4)

    def test_transfer_degenerate(self):
        ci = ci_transfer(0.2, 0.35, 0.35, 0.35, 0.01, 0.05)
        assert (ci.lower, ci.upper) == (0.2, 0.2)

    def test_transfer_invalid(self):
        with pytest.raises(ValueError):
            ci_transfer(0.2, 0.3, 0.1, 0.2, 0.05, 0.01)

    @given(unit, unit, unit, st.floats(0.001, 0.5))
    def test_transfer_reduces_to_direct(self, base, x, y, p):
        lo, hi = min(x, y), max(x, y)
        t, d = ci_transfer(base, base, lo, hi, p, p), ci_direct(base, lo, hi)
        assert (t.lower, t.upper) == (d.lower, d.upper)

    @given(unit, st.floats(-1, 2), st.floats(-1, 2))
    def test_interval_inside_unit(self, base, x, y):
        ci = ci_direct(base, min(x, y), max(x, y))
        assert 0 <= ci.lower <= 1 and 0 <= ci.upper <= 1


class TestBand:
    def test_zero_radius(self):
        base = np.array([1, 0.3, 0.2])
        assert simultaneous_band(np.tile(base, (5, 1)), base).radius == 0

    def test_small_example(self):
        base = np.zeros(2)
        reps = np.array([[0, 0.1], [0, -0.2], [0, 0.3], [0, 0.4]])
        assert simultaneous_band(reps, base, 0.5).radius == 0.2

    def test_full_level_is_max(self):
        base = np.zeros(2)
        reps = np.array([[0, 0.1], [0, -0.2], [0, 0.3], [0, 0.4]])
        assert simultaneous_band(reps, base, 1.0).radius == 0.4

    def test_no_defined_row(self):
        with pytest.raises(NoBandError):
            simultaneous_band(np.array([[np.nan, 0.1]]), np.zeros(2))

    def test_contains(self):
        band = simultaneous_band(np.array([[0.0, 0.1], [0.0, 0.3]]), np.zeros(2), 1.0)
        assert band.contains(np.zeros(2), np.array([0.0, 0.25]))
        assert not band.contains(np.zeros(2), np.array([0.0, 0.35]))

    @given(
        arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(2, 5)), elements=st.one_of(unit, st.just(math.nan))),
        st.floats(0.05, 1.0),
    )
    def test_matches_sort_oracle(self, reps, level):
        base = np.full(reps.shape[1], 0.5)
        lags = range(1, reps.shape[1])
        ok = [row for row in reps if not any(math.isnan(row[h]) for h in lags)]
        if not ok:
            return
        got = simultaneous_band(reps, base, level, lags).radius
        assert got == oracles.band_radius(reps.tolist(), base.tolist(), level, list(lags))


class TestBootstrapExtremogram:
    @pytest.mark.parametrize("scheme", SCHEMES)
    def test_shape_and_determinism(self, scheme):
        x = np.random.default_rng(15).standard_t(3, 410)
        a = bootstrap_extremogram(x, EmpiricalQuantile(0.05), scheme, 20, 50, seed=3)
        b = bootstrap_extremogram(x, EmpiricalQuantile(0.05), scheme, 20, 50, seed=3)
        assert a.values.shape == (20, 11)
        np.testing.assert_array_equal(a.values, b.values)

    def test_threshold_fixed_from_sample(self):
        x = np.random.default_rng(16).standard_t(3, 410)
        reps = bootstrap_extremogram(x, EmpiricalQuantile(0.05), "multiplier", 5, 50, seed=0)
        assert reps.base.threshold == estimate_threshold(x, EmpiricalQuantile(0.05), n=400)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            bootstrap_extremogram(np.ones(50) * 2, 1.0, "jackknife", 5, 5, seed=0)

    def test_replicates_csv_roundtrip(self, tmp_path):
        vals = np.array([[1.0, np.nan], [1.0, 0.25]])
        write_replicates_csv(vals, tmp_path / "r.csv")
        assert (tmp_path / "r.csv").read_text().splitlines()[1] == "1.0,NA"
        np.testing.assert_array_equal(read_replicates_csv(tmp_path / "r.csv"), vals)
