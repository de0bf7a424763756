"""Counterbalanced trial plans for the roughness-rating experiment."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._errors import RangeError
from ._log import get_logger
from ._parse import write_rows
from ._types import STIMULUS_LABELS, TEST_MATERIALS, Material

REPETITIONS = 5
BASELINE_EVERY = 6
TRIAL_HEADER = ("index", "material", "stimulus", "repetition", "is_training", "is_baseline")

# first row of a Williams design for six conditions; row r adds r mod 6
_WILLIAMS_ROW = (0, 1, 5, 2, 4, 3)

_log = get_logger("trials")


def latin_square_row(row: int, n: int = 6) -> tuple[int, ...]:
    """Row ``row`` of the balanced Latin square over ``n`` (even) conditions.

    Examples:
        >>> latin_square_row(0)
        (0, 1, 5, 2, 4, 3)
        >>> latin_square_row(1)
        (1, 2, 0, 3, 5, 4)
    """
    if n != len(_WILLIAMS_ROW):
        raise RangeError(f"only {len(_WILLIAMS_ROW)} conditions are supported")
    return tuple((c + row) % n for c in _WILLIAMS_ROW)


@dataclass(frozen=True, slots=True)
class Trial:
    """One presentation.

    Attributes:
        index: Zero-based position in the plan.
        material: Physical material touched.
        stimulus: Stimulus label.
        repetition: 1-based repetition of this (material, stimulus) pair.
        is_training: First repetition; no rating is recorded.
        is_baseline: The baseline (plywood, N) is presented after this trial.
    """

    index: int
    material: Material
    stimulus: str
    repetition: int
    is_training: bool
    is_baseline: bool


@dataclass(frozen=True, slots=True)
class TrialPlan:
    """Ordered trials for one participant."""

    seed: int
    participant: int
    material_order: tuple[Material, ...]
    trials: tuple[Trial, ...]

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self) -> Iterator[Trial]:
        return iter(self.trials)

    def __getitem__(self, index: int) -> Trial:
        return self.trials[index]

    def stimulus_order(self, material: Material, repetition: int) -> list[str]:
        """Stimulus order used for one material block repetition."""
        return [
            t.stimulus for t in self.trials if t.material is material and t.repetition == repetition
        ]


def generate_trials(seed: int, participant: int) -> TrialPlan:
    """Build the 6 × 7 × 5 = 210 trial plan for one participant.

    Materials follow row ``participant mod 6`` of the balanced Latin square. Each material
    block holds five repetitions, each a seeded random permutation of the seven stimuli.

    Raises:
        RangeError: ``participant`` is negative.
    """
    if participant < 0:
        raise RangeError("participant index must be non-negative")
    rng = np.random.default_rng([seed, participant])
    order = tuple(TEST_MATERIALS[i] for i in latin_square_row(participant % len(TEST_MATERIALS)))

    trials: list[Trial] = []
    for material in order:
        for repetition in range(1, REPETITIONS + 1):
            for j in rng.permutation(len(STIMULUS_LABELS)):
                index = len(trials)
                trials.append(
                    Trial(
                        index=index,
                        material=material,
                        stimulus=STIMULUS_LABELS[int(j)],
                        repetition=repetition,
                        is_training=repetition == 1,
                        is_baseline=(index + 1) % BASELINE_EVERY == 0,
                    )
                )
    _log.debug(
        "generated {n} trials for participant {participant}",
        n=len(trials),
        participant=participant,
        seed=seed,
    )
    return TrialPlan(seed, participant, order, tuple(trials))


def write_trials_csv(path: str | Path, plan: TrialPlan | Sequence[Trial]) -> Path:
    return write_rows(
        path,
        TRIAL_HEADER,
        (
            (
                t.index,
                t.material.value,
                t.stimulus,
                t.repetition,
                str(t.is_training).lower(),
                str(t.is_baseline).lower(),
            )
            for t in plan
        ),
    )
