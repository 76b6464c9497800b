"""Tests for count-table and random-distillation novelty."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mace.novelty import RndNovelty, VisitCounts


class TestVisitCounts:
    def test_formula_substitutions(self):
        table = VisitCounts(10)
        cell = (3, 4)
        table.record(cell)
        assert table.novelty(cell) == pytest.approx(10.0)
        for _ in range(3):
            table.record(cell)
        assert table.novelty(cell) == pytest.approx(5.0)
        for _ in range(96):
            table.record(cell)
        assert table.novelty(cell) == pytest.approx(1.0)

    def test_record_is_local(self):
        table = VisitCounts(10)
        table.record((3, 4))
        assert table.counts[3, 4] == 1
        assert table.counts[5, 5] == 0
        table.record((3, 4))
        assert table.counts[3, 4] == 2

    def test_unvisited_query_rejected(self):
        table = VisitCounts(10)
        with pytest.raises(ValueError, match="unvisited"):
            table.novelty((0, 0))
        table.record((1, 1))
        with pytest.raises(ValueError, match="unvisited"):
            table.novelty_batch([(1, 1), (0, 0)])

    @given(st.integers(1, 500), st.integers(1, 500))
    @settings(max_examples=50, deadline=None)
    def test_strictly_decreasing_in_count(self, n1, n2):
        if n1 == n2:
            return
        lo, hi = sorted((n1, n2))
        table = VisitCounts(4)
        for _ in range(lo):
            table.record((0, 0))
        nov_lo = table.novelty((0, 0))
        for _ in range(hi - lo):
            table.record((0, 0))
        nov_hi = table.novelty((0, 0))
        assert nov_lo > nov_hi

    def test_inverse_square_increments_track_visits(self):
        # Each record-then-query step bumps (1/novelty)^2 by exactly 1/100
        # for the visited cell, so the increments over a trajectory sum to
        # visits / 100.
        rng = np.random.default_rng(0)
        table = VisitCounts(5)
        last = {}
        increments = 0.0
        visits = 0
        for _ in range(300):
            cell = (int(rng.integers(5)), int(rng.integers(5)))
            table.record(cell)
            q = 1.0 / table.novelty(cell) ** 2
            increments += q - last.get(cell, 0.0)
            last[cell] = q
            visits += 1
        assert increments == pytest.approx(visits / 100.0, rel=1e-9)

    def test_batch_matches_scalar(self):
        table = VisitCounts(6)
        cells = [(0, 0), (1, 2), (0, 0), (5, 5)]
        table.record_batch(cells)
        batch = table.novelty_batch(cells)
        singles = [table.novelty(c) for c in cells]
        assert np.allclose(batch, singles)

    def test_dump_is_plain_text_matrix(self):
        table = VisitCounts(3)
        table.record((2, 0))
        table.record((2, 0))
        lines = table.dump().splitlines()
        assert len(lines) == 3
        assert lines[0].split() == ["0", "0", "2"]


class TestRndNovelty:
    def test_predictor_equal_to_target_scores_zero(self):
        est = RndNovelty(3, rng=np.random.default_rng(0))
        est.predictor = est.target.copy()
        x = np.array([0.2, -1.0, 0.5])
        assert est.novelty(x) == pytest.approx(0.0, abs=1e-12)

    def test_fresh_predictor_scores_positive(self):
        est = RndNovelty(3, rng=np.random.default_rng(1))
        assert est.novelty(np.array([0.3, 0.1, -0.7])) > 0.0

    def test_training_reduces_novelty_of_seen_input(self):
        est = RndNovelty(4, rng=np.random.default_rng(2))
        X = np.array([[0.5, -0.25, 1.0, 0.0]])
        before = est.novelty(X[0])
        for _ in range(2000):
            est.update(X)
        assert est.novelty(X[0]) < before

    def test_loss_decreases_on_average(self):
        est = RndNovelty(4, rng=np.random.default_rng(3))
        X = np.array([[0.1, 0.9, -0.4, 0.2]])
        losses = [est.update(X) for _ in range(600)]
        assert np.mean(losses[-100:]) < np.mean(losses[:100])

    def test_empty_batch_rejected(self):
        est = RndNovelty(3, rng=np.random.default_rng(4))
        with pytest.raises(ValueError):
            est.update(np.zeros((0, 3)))

    def test_target_frozen_across_updates(self):
        est = RndNovelty(3, rng=np.random.default_rng(5))
        before = est.target_fingerprint()
        X = np.random.default_rng(6).standard_normal((16, 3))
        for _ in range(50):
            est.update(X)
        assert est.target_fingerprint() == before
