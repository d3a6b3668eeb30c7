import math

import numpy as np
import pytest
from conftest import scored_tables
from hypothesis import given
from hypothesis import strategies as st
from oracle import naive_histogram

from trustlens import (
    DensityConfig,
    InvalidInputError,
    ScoredTable,
    conditional_trust_densities,
    kde_curve,
    trust_density,
)
from trustlens.density import (
    bin_indices,
    class_conditional_densities,
    histogram_density,
    local_maxima,
    silverman_bandwidth,
)

trust_lists = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=80)


class TestHistogram:
    def test_bin_boundaries(self):
        t = np.array([0.0, 0.04, 0.0399999, 0.96, 1.0])
        assert bin_indices(t, 25).tolist() == [0, 1, 0, 24, 24]

    @given(trust_lists, st.integers(2, 30))
    def test_matches_naive_binning(self, trusts, bins):
        d = histogram_density(trusts, bins)
        counts, mass = naive_histogram(trusts, bins, len(trusts))
        assert d.counts.tolist() == counts
        assert np.abs(d.values - mass).max() <= 1e-12
        assert abs(d.integral() - 1.0) <= 1e-12

    def test_denominator_scales_mass(self):
        d = histogram_density([0.1, 0.2], 10, denominator=8)
        assert d.total_mass == 0.25
        assert d.integral() == 0.25

    def test_rejects_values_outside_unit_interval(self):
        with pytest.raises(InvalidInputError):
            histogram_density([0.5, 1.2])
        with pytest.raises(InvalidInputError):
            trust_density([])

    @pytest.mark.parametrize("bins", [1, 0, 2.5])
    def test_config_validates_bins(self, bins):
        with pytest.raises(InvalidInputError):
            DensityConfig(bins=bins)


class TestKde:
    def test_conserves_mass_with_boundary_reflection(self):
        # points piled at the edges would leak mass without reflection
        d = kde_curve([0.0, 0.0, 0.01, 1.0, 0.99], bandwidth=0.08, grid_size=2049)
        assert abs(d.integral() - 1.0) < 1e-4

    @given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=40), st.floats(0.02, 0.3))
    def test_mass_and_non_negativity(self, trusts, bw):
        d = kde_curve(trusts, bw, 1025)
        assert np.all(d.values >= 0)
        assert abs(d.integral() - 1.0) < 2e-3

    def test_symmetric_input_gives_symmetric_curve(self):
        d = kde_curve([0.2, 0.8], 0.1, 513)
        np.testing.assert_allclose(d.values, d.values[::-1], rtol=1e-12, atol=1e-12)

    def test_matches_direct_reflected_sum(self):
        pts, bw = np.array([0.03, 0.4, 0.97]), 0.1
        d = kde_curve(pts, bw, 64)
        ref = np.zeros_like(d.grid)
        for p in pts:
            for k in range(-3, 4):
                for c in (2 * k + p, 2 * k - p):
                    ref += np.exp(-0.5 * ((d.grid - c) / bw) ** 2) / (bw * math.sqrt(2 * math.pi))
        np.testing.assert_allclose(d.values, ref / len(pts), rtol=1e-12, atol=1e-12)

    def test_silverman_rule(self):
        t = np.linspace(0.2, 0.6, 50)
        assert silverman_bandwidth(t) == pytest.approx(1.06 * np.std(t, ddof=1) * 50**-0.2)
        assert silverman_bandwidth([0.5, 0.5, 0.5]) == 0.01

    def test_bandwidth_below_grid_spacing_is_rejected(self):
        with pytest.raises(InvalidInputError):
            kde_curve([0.5], 0.001, 512)

    def test_default_estimator_choice(self):
        d = trust_density([0.2, 0.3, 0.9], DensityConfig(estimator="kde"))
        assert d.kind == "kde" and len(d.grid) == 512 and d.bandwidth >= 0.01


class TestConditionalPairs:
    def _one_class(self, n=40, seed=0):
        rng = np.random.default_rng(seed)
        actor = rng.integers(0, 3, n)
        return ScoredTable.from_columns(actor, np.zeros(n, dtype=np.int64), rng.uniform(0.34, 1.0, n))

    def test_parts_carry_their_priors(self):
        table = self._one_class()
        pair = conditional_trust_densities(table, DensityConfig(bins=20))
        acc = table.correct.mean()
        assert pair.correct.total_mass == pytest.approx(acc)
        assert pair.incorrect.total_mass == pytest.approx(1 - acc)
        assert pair.correct.integral() + pair.incorrect.integral() == pytest.approx(1.0, abs=1e-12)
        assert pair.oracle_class == 0

    def test_kde_parts_add_to_unconditional(self):
        pair = conditional_trust_densities(self._one_class(seed=4), DensityConfig(estimator="kde"))
        np.testing.assert_allclose(pair.correct.values + pair.incorrect.values, pair.unconditional.values, atol=1e-12)
        assert pair.correct.bandwidth == pair.unconditional.bandwidth

    def test_mixed_classes_are_rejected(self):
        table = ScoredTable.from_columns([0, 1], [0, 1], [0.9, 0.9])
        with pytest.raises(InvalidInputError):
            conditional_trust_densities(table)

    @given(scored_tables(max_records=80))
    def test_histogram_parts_sum_exactly(self, case):
        labels, table = case
        for z, pair in class_conditional_densities(table, labels, DensityConfig(bins=25)).items():
            assert np.array_equal(pair.correct.values + pair.incorrect.values, pair.unconditional.values)
            direct = histogram_density(table.trust[table.oracle == z], 25)
            assert np.array_equal(pair.unconditional.counts, direct.counts)
            assert np.abs(pair.unconditional.values - direct.values).max() <= 1e-15

    @given(scored_tables(max_records=50, max_classes=4))
    def test_class_batch_matches_single_class_path(self, case):
        labels, table = case
        batch = class_conditional_densities(table, labels)
        assert sorted(batch) == sorted(set(table.oracle.tolist()))
        for z, pair in batch.items():
            single = conditional_trust_densities(table.subset(table.oracle == z))
            assert np.array_equal(pair.correct.values, single.correct.values)
            assert np.array_equal(pair.incorrect.counts, single.incorrect.counts)


class TestLocalMaxima:
    @pytest.mark.parametrize(
        "values,expected",
        [
            ([0, 1, 0], [1]),
            ([0, 1, 1, 0], [1]),
            ([2, 1, 0], [0]),
            ([0, 1, 2], [2]),
            ([1, 1, 1], []),
            ([0, 2, 1, 3, 0], [1, 3]),
            ([0, 1, 1, 2, 0], [3]),
        ],
    )
    def test_cases(self, values, expected):
        assert local_maxima(values) == expected
