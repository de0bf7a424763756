"""Grid search of plant and controller parameters against measured step behaviour."""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Any

from ._config import controller_document
from ._log import get_logger
from ._pneumo import (
    REFERENCE_ACTIVATION_S,
    REFERENCE_AVERAGES,
    REFERENCE_DEACTIVATION_S,
    PlantParams,
    run_step_response,
)
from ._types import PidGains

MAX_OVERSHOOT_KPA = 1.5
TIMING_TARGET_KPA = 10.0

_log = get_logger("calibrate")


@dataclass(frozen=True, slots=True)
class CalibrationGrid:
    """Candidate values searched by :func:`calibrate`; every combination is tried."""

    pump_max_flow: tuple[float, ...] = (3.2, 3.525, 3.9)
    leak_coeff: tuple[float, ...] = (0.03, 0.04)
    kp: tuple[float, ...] = (0.15, 0.2)
    ki: tuple[float, ...] = (0.8, 1.0, 1.2)
    targets_kpa: tuple[float, ...] = (2.0, 6.0, 10.0)

    def __post_init__(self) -> None:
        for name in ("pump_max_flow", "leak_coeff", "kp", "ki", "targets_kpa"):
            values = getattr(self, name)
            if not values:
                raise ValueError(f"{name} needs at least one value")
            if any(v <= 0 for v in values):
                raise ValueError(f"{name} values must be positive")
        if TIMING_TARGET_KPA not in self.targets_kpa:
            raise ValueError(f"targets_kpa must include {TIMING_TARGET_KPA} kPa")

    def __len__(self) -> int:
        return len(self.pump_max_flow) * len(self.leak_coeff) * len(self.kp) * len(self.ki)


@dataclass(frozen=True, slots=True)
class Candidate:
    """Scored parameter set."""

    plant: PlantParams
    gains: PidGains
    mae_stable: float
    activation_time: float
    deactivation_time: float
    overshoot: float
    score: float

    @property
    def feasible(self) -> bool:
        return self.overshoot <= MAX_OVERSHOOT_KPA and math.isfinite(self.score)


def _relative_sq(value: float, reference: float) -> float:
    return ((value - reference) / reference) ** 2


def score_candidate(
    plant: PlantParams,
    gains: PidGains,
    targets: Sequence[float],
    *,
    seed: int = 0,
) -> Candidate:
    """Run one step per target and score the averages against the measured figures.

    The score is the sum of squared relative distances of the average stable-stage MAE,
    the activation time and the deactivation time (both at 10 kPa) from their measured
    values. Lower is better.
    """
    maes: list[float] = []
    overshoot = 0.0
    activation = deactivation = math.inf
    for i, target in enumerate(targets):
        trace, metrics = run_step_response(target, gains=gains, plant=plant, seed=seed + i)
        maes.append(metrics.mae_stable)
        overshoot = max(overshoot, trace.overshoot)
        if target == TIMING_TARGET_KPA:
            activation = metrics.activation_time
            deactivation = metrics.deactivation_time
    mae = sum(maes) / len(maes)
    score = (
        _relative_sq(mae, REFERENCE_AVERAGES[2])
        + _relative_sq(activation, REFERENCE_ACTIVATION_S)
        + _relative_sq(deactivation, REFERENCE_DEACTIVATION_S)
    )
    return Candidate(plant, gains, mae, activation, deactivation, overshoot, score)


def calibrate(
    grid: CalibrationGrid | None = None,
    *,
    base_plant: PlantParams | None = None,
    base_gains: PidGains | None = None,
    seed: int = 0,
) -> Candidate:
    """Return the best feasible candidate of the grid.

    Candidates whose overshoot exceeds 1.5 kPa are rejected.

    Raises:
        ValueError: No candidate is feasible.
    """
    grid = grid or CalibrationGrid()
    base_plant = base_plant or PlantParams()
    base_gains = base_gains or PidGains()
    best: Candidate | None = None
    for flow, leak, kp, ki in itertools.product(
        grid.pump_max_flow, grid.leak_coeff, grid.kp, grid.ki
    ):
        candidate = score_candidate(
            replace(base_plant, pump_max_flow=flow, leak_coeff=leak),
            replace(base_gains, kp=kp, ki=ki),
            grid.targets_kpa,
            seed=seed,
        )
        _log.debug(
            "candidate flow={flow} leak={leak} kp={kp} ki={ki}",
            flow=flow,
            leak=leak,
            kp=kp,
            ki=ki,
            score=round(candidate.score, 5),
            feasible=candidate.feasible,
        )
        if candidate.feasible and (best is None or candidate.score < best.score):
            best = candidate
    if best is None:
        raise ValueError("no candidate meets the overshoot limit")
    _log.info(
        "best candidate scores {score:.4f}",
        score=best.score,
        mae_stable=round(best.mae_stable, 4),
        activation_s=best.activation_time,
        deactivation_s=best.deactivation_time,
    )
    return best


def calibration_document(candidate: Candidate, grid: CalibrationGrid) -> dict[str, Any]:
    """Controller config for a candidate, with the search recorded under ``calibration``."""
    return controller_document(
        candidate.plant,
        candidate.gains,
        calibration={
            "method": "grid",
            "targets_kpa": list(grid.targets_kpa),
            "reference": {
                "mae_stable_kpa": REFERENCE_AVERAGES[2],
                "activation_s": REFERENCE_ACTIVATION_S,
                "deactivation_s": REFERENCE_DEACTIVATION_S,
            },
            "max_overshoot_kpa": MAX_OVERSHOOT_KPA,
            "result": {
                "mae_stable_kpa": round(candidate.mae_stable, 4),
                "activation_s": round(candidate.activation_time, 3),
                "deactivation_s": round(candidate.deactivation_time, 3),
                "overshoot_kpa": round(candidate.overshoot, 4),
                "score": round(candidate.score, 6),
            },
        },
    )
