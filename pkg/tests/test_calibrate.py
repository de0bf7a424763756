"""Tests for the plant and gains grid search."""

from __future__ import annotations

import pytest

from hapticsim import CalibrationGrid, PidGains, calibrate, calibration_document
from hapticsim import _calibrate as calibration
from hapticsim._calibrate import score_candidate

TINY = {
    "pump_max_flow": (3.525,),
    "leak_coeff": (0.04,),
    "ki": (1.0,),
    "targets_kpa": (10.0,),
}


class TestCalibrationGrid:
    """Test grid validation."""

    def test_default_size(self) -> None:
        """Test the number of combinations."""
        assert len(CalibrationGrid()) == 3 * 2 * 2 * 3

    @pytest.mark.parametrize(
        "kwargs",
        [{"kp": ()}, {"ki": (0.0,)}, {"targets_kpa": (2.0, 6.0)}],
    )
    def test_invalid(self, kwargs: dict[str, tuple[float, ...]]) -> None:
        """Test empty lists, non-positive values and the timing target."""
        with pytest.raises(ValueError):
            CalibrationGrid(**kwargs)


class TestCalibrate:
    """Test the search itself."""

    def test_picks_lowest_feasible_score(self) -> None:
        """Test that the best candidate has the minimum score among feasible ones."""
        grid = CalibrationGrid(kp=(0.15, 0.2), **TINY)
        best = calibrate(grid, seed=0)
        scores = []
        for kp in grid.kp:
            candidate = score_candidate(
                best.plant,
                PidGains(kp=kp, ki=1.0),
                grid.targets_kpa,
                seed=0,
            )
            if candidate.feasible:
                scores.append(candidate.score)
        assert best.score == min(scores)
        assert best.overshoot <= 1.5

    def test_nothing_feasible(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test the error when every candidate overshoots the limit."""
        monkeypatch.setattr(calibration, "MAX_OVERSHOOT_KPA", -1.0)
        with pytest.raises(ValueError, match="overshoot"):
            calibrate(CalibrationGrid(kp=(0.2,), **TINY))

    def test_document(self) -> None:
        """Test the calibration block of the written config."""
        grid = CalibrationGrid(kp=(0.2,), **TINY)
        doc = calibration_document(calibrate(grid), grid)
        block = doc["calibration"]
        assert block["method"] == "grid"
        assert block["targets_kpa"] == [10.0]
        assert set(block["result"]) == {
            "mae_stable_kpa",
            "activation_s",
            "deactivation_s",
            "overshoot_kpa",
            "score",
        }
        assert doc["gains"]["kp"] == 0.2
