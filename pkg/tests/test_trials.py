"""Tests for counterbalanced trial plans."""

from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hapticsim import STIMULUS_LABELS, TEST_MATERIALS, RangeError, generate_trials, write_trials_csv
from hapticsim._trials import TRIAL_HEADER, latin_square_row


class TestLatinSquare:
    """Test the balanced material order."""

    def test_rows(self) -> None:
        """Test the first two rows."""
        assert latin_square_row(0) == (0, 1, 5, 2, 4, 3)
        assert latin_square_row(1) == (1, 2, 0, 3, 5, 4)

    def test_columns_are_permutations(self) -> None:
        """Test that every condition appears once per position."""
        rows = [latin_square_row(r) for r in range(6)]
        for column in zip(*rows, strict=True):
            assert sorted(column) == list(range(6))

    def test_first_order_carryover_balanced(self) -> None:
        """Test that every ordered pair of neighbours occurs exactly once."""
        pairs = Counter(
            (a, b)
            for r in range(6)
            for a, b in zip(latin_square_row(r), latin_square_row(r)[1:], strict=False)
        )
        assert len(pairs) == 30
        assert set(pairs.values()) == {1}

    def test_unsupported_size(self) -> None:
        """Test that only six conditions are supported."""
        with pytest.raises(RangeError):
            latin_square_row(0, n=4)


class TestGenerateTrials:
    """Test per-participant plans."""

    def test_size(self) -> None:
        """Test 6 materials × 7 stimuli × 5 repetitions."""
        plan = generate_trials(seed=1, participant=0)
        assert len(plan) == 210
        assert [t.index for t in plan] == list(range(210))

    def test_material_order_follows_square(self) -> None:
        """Test that materials are blocked in Latin-square order."""
        plan = generate_trials(seed=1, participant=7)
        expected = tuple(TEST_MATERIALS[i] for i in latin_square_row(1))
        assert plan.material_order == expected
        blocks = [plan[i].material for i in range(0, 210, 35)]
        assert tuple(blocks) == expected

    def test_every_pair_five_times(self) -> None:
        """Test that each (material, stimulus) pair occurs once per repetition."""
        plan = generate_trials(seed=3, participant=2)
        counts = Counter((t.material, t.stimulus) for t in plan)
        assert len(counts) == 42
        assert set(counts.values()) == {5}
        for material in TEST_MATERIALS:
            for repetition in range(1, 6):
                order = plan.stimulus_order(material, repetition)
                assert sorted(order) == sorted(STIMULUS_LABELS)

    def test_training_and_baseline_flags(self) -> None:
        """Test that the first repetition is training and every sixth trial has a baseline."""
        plan = generate_trials(seed=0, participant=0)
        assert all(t.is_training == (t.repetition == 1) for t in plan)
        assert sum(t.is_training for t in plan) == 42
        assert [t.index for t in plan if t.is_baseline][:3] == [5, 11, 17]
        assert sum(t.is_baseline for t in plan) == 35

    def test_seeded(self) -> None:
        """Test that the plan depends only on seed and participant."""
        assert generate_trials(4, 1) == generate_trials(4, 1)
        assert generate_trials(4, 1).trials != generate_trials(5, 1).trials

    def test_negative_participant(self) -> None:
        """Test participant validation."""
        with pytest.raises(RangeError):
            generate_trials(0, -1)

    @settings(max_examples=20)
    @given(seed=st.integers(0, 2**32 - 1), participant=st.integers(0, 100))
    def test_balanced_for_any_seed(self, seed: int, participant: int) -> None:
        """Test the pair counts for arbitrary seeds and participants."""
        plan = generate_trials(seed, participant)
        counts = Counter((t.material, t.stimulus) for t in plan)
        assert set(counts.values()) == {5}


class TestWriteTrials:
    """Test the trial CSV."""

    def test_csv(self, tmp_path: Path) -> None:
        """Test header, row count and boolean spelling."""
        path = write_trials_csv(tmp_path / "trials.csv", generate_trials(0, 0))
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == TRIAL_HEADER
        assert len(rows) == 211
        assert rows[6][4:] == ["true", "true"]
        assert rows[12][3:] == ["2", "false", "true"]
        assert rows[1][4] == "true"
