import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curspca.cursampler import (
    DISTINCT,
    WITH_REPLACEMENT,
    LeverageScores,
    cur_decompose,
    leverage_scores,
    sample_columns,
)
from curspca.errors import InfeasibleError, ParameterError
from curspca.matcore import column_projection_error

import oracles


class TestLeverageScores:
    def test_canonical_basis(self):
        lev = leverage_scores(np.eye(6)[:, :3])
        np.testing.assert_allclose(lev.scores, [1 / 3, 1 / 3, 1 / 3, 0, 0, 0])

    def test_single_direction(self):
        e3 = np.zeros((5, 1))
        e3[3] = 1.0
        np.testing.assert_array_equal(leverage_scores(e3).scores, [0, 0, 0, 1, 0])

    def test_matches_entrywise_oracle(self):
        v = oracles.random_orthonormal(np.random.default_rng(4), 6, 2)
        lev = leverage_scores(v)
        expected = [sum(float(e) ** 2 for e in row) / 2 for row in v]
        np.testing.assert_allclose(lev.scores, expected, atol=1e-14)
        assert abs(lev.scores.sum() - 1) < 1e-12

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ParameterError, match="1e-08"):
            leverage_scores(np.ones((4, 2)))

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), p=st.integers(1, 20))
    def test_permutation_equivariant(self, seed, p):
        g = np.random.default_rng(seed)
        k = int(g.integers(1, p + 1))
        v = oracles.random_orthonormal(g, p, k)
        perm = g.permutation(p)
        np.testing.assert_allclose(leverage_scores(v[perm]).scores, leverage_scores(v).scores[perm], atol=1e-15)


class TestSampleColumns:
    @pytest.mark.parametrize("mode", [WITH_REPLACEMENT, DISTINCT])
    def test_degenerate_distribution(self, mode):
        scores = np.zeros(5)
        scores[2] = 1.0
        sel, _ = sample_columns(scores, 1, mode, seed=9)
        np.testing.assert_array_equal(sel, [2])

    def test_distinct_exhaustion(self):
        sel, _ = sample_columns(np.full(7, 1 / 7), 7, DISTINCT, seed=1)
        np.testing.assert_array_equal(sel, np.arange(7))

    def test_uniform_frequencies(self):
        n_draws = 100_000
        counts = np.zeros(4)
        scores = np.full(4, 0.25)
        for s in range(n_draws):
            sel, _ = sample_columns(scores, 1, WITH_REPLACEMENT, seed=s)
            counts[sel[0]] += 1
        sd = np.sqrt(n_draws * 0.25 * 0.75)
        assert np.all(np.abs(counts - n_draws * 0.25) <= 4 * sd)

    def test_reproducible(self):
        scores = np.random.default_rng(0).random(30)
        scores /= scores.sum()
        for mode in (WITH_REPLACEMENT, DISTINCT):
            a, _ = sample_columns(scores, 10, mode, seed=42)
            b, _ = sample_columns(scores, 10, mode, seed=42)
            np.testing.assert_array_equal(a, b)

    def test_with_replacement_dedups(self):
        scores = np.array([0.9, 0.1, 0.0])
        sel, draws = sample_columns(scores, 3, WITH_REPLACEMENT, seed=0)
        assert draws == 3 and sel.size <= 3
        assert np.all(np.diff(sel) > 0)

    def test_distinct_infeasible(self):
        with pytest.raises(InfeasibleError):
            sample_columns(np.array([0.5, 0.5, 0.0]), 3, DISTINCT, seed=0)

    @pytest.mark.parametrize("c", [0, 4])
    def test_c_out_of_range(self, c):
        with pytest.raises(ParameterError):
            sample_columns(np.full(3, 1 / 3), c)

    def test_bad_mode(self):
        with pytest.raises(ParameterError):
            sample_columns(np.full(3, 1 / 3), 1, "exactly")

    @settings(max_examples=80, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), p=st.integers(2, 15), mode=st.sampled_from([WITH_REPLACEMENT, DISTINCT]))
    def test_zero_score_never_selected(self, seed, p, mode):
        g = np.random.default_rng(seed)
        scores = g.random(p) * (g.random(p) < 0.6)
        if scores.sum() == 0:
            scores[0] = 1.0
        scores /= scores.sum()
        c = int(g.integers(1, np.count_nonzero(scores) + 1))
        sel, _ = sample_columns(LeverageScores(scores, 1), c, mode, seed=seed)
        assert np.all(scores[sel] > 0)
        if mode == DISTINCT:
            assert sel.size == c


class TestCurDecompose:
    def test_rank_one_exact(self):
        g = np.random.default_rng(1)
        x = np.outer(g.standard_normal(6), g.uniform(1, 2, size=5))
        res = cur_decompose(x, 1, 1, seed=3)
        assert res.error < 1e-10

    def test_error_recomputable(self, rng):
        x = rng.standard_normal((10, 12))
        res = cur_decompose(x, 3, 5, DISTINCT, seed=2)
        assert res.selected.size == 5
        assert res.error == column_projection_error(x, res.selected)
        assert res.seed == 2 and res.draws == 5

    def test_never_beats_best_subset(self):
        x = np.random.default_rng(6).standard_normal((6, 8))
        best = oracles.best_subset_error(x, 3)
        for seed in range(20):
            for mode in (WITH_REPLACEMENT, DISTINCT):
                assert cur_decompose(x, 2, 3, mode, seed).error >= best - 1e-12

    def test_parameter_checks(self, rng):
        x = rng.standard_normal((4, 5))
        with pytest.raises(ParameterError):
            cur_decompose(x, 5, 2)
        with pytest.raises(ParameterError):
            cur_decompose(x, 2, 6)

    def test_rank_deficient_pads_scores(self):
        g = np.random.default_rng(2)
        x = np.outer(g.standard_normal(6), g.standard_normal(5))
        res = cur_decompose(x, 3, 2, seed=0)
        assert abs(res.scores.scores.sum() - 1) < 1e-12
