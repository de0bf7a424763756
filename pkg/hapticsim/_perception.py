"""Perceived-roughness ratings and stimulus planning for material substitution.

Each (material, stimulus) cell is modelled as a Normal(mean, sd) distribution of
ratings on the 1-100 slider, with plywood and no stimulus anchored at 50.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Literal

from scipy.stats import norm

from ._errors import ConfigError, SubstitutionError, UnknownEntryError
from ._log import get_logger
from ._parse import read_rows
from ._types import (
    ALL_STIMULI,
    RATING_ORDER,
    STIMULUS_LABELS,
    TEST_MATERIALS,
    Material,
    MaterialRole,
    Stimulus,
    material_from_name,
    stimulus_from_label,
)

OverlapMetric = Literal["ovl", "bhattacharyya"]

BASELINE_ANCHOR = 50.0
RATINGS_FILE = "roughness_ratings.csv"

_log = get_logger("perception")


@dataclass(frozen=True, slots=True)
class RatingEntry:
    """Mean and SD of ratings for one cell."""

    mean: float
    sd: float


@dataclass(frozen=True, slots=True)
class RatingTable:
    """Material × stimulus rating table.

    Attributes:
        entries: (material, label) → rating entry for the six test materials.
        baseline_anchor: Rating of the baseline material with no stimulus.
    """

    entries: Mapping[tuple[Material, str], RatingEntry]
    baseline_anchor: float = BASELINE_ANCHOR

    def __post_init__(self) -> None:
        validate_table(self.entries)

    def lookup(self, material: Material, stimulus: Stimulus | str) -> RatingEntry:
        label = stimulus if isinstance(stimulus, str) else stimulus.label
        if material.role is MaterialRole.BASELINE:
            if label == "N":
                return RatingEntry(self.baseline_anchor, 0.0)
            raise UnknownEntryError(f"baseline material {material.value} is only rated for N")
        try:
            return self.entries[(material, label)]
        except KeyError:
            raise UnknownEntryError(f"no rating for ({material.value}, {label})") from None


def validate_table(entries: Mapping[tuple[Material, str], RatingEntry]) -> None:
    """Check completeness, ranges and the per-material modulation order.

    Raises:
        ConfigError: On the first violation.
    """
    for material in TEST_MATERIALS:
        for label in STIMULUS_LABELS:
            entry = entries.get((material, label))
            path = f"{material.value}.{label}"
            if entry is None:
                raise ConfigError(path, "missing rating entry")
            if not 1.0 <= entry.mean <= 100.0:
                raise ConfigError(path, f"mean {entry.mean} outside [1, 100]")
            if entry.sd <= 0:
                raise ConfigError(path, "sd must be positive")
        means = [entries[(material, label)].mean for label in RATING_ORDER]
        if any(a < b for a, b in zip(means, means[1:], strict=False)):
            order = " >= ".join(RATING_ORDER)
            raise ConfigError(material.value, f"means must satisfy {order}")
    expected = len(TEST_MATERIALS) * len(STIMULUS_LABELS)
    if len(entries) != expected:
        raise ConfigError("", f"expected {expected} rating entries, got {len(entries)}")


def load_rating_table(path: str | Path | None = None) -> RatingTable:
    """Load and validate a ``material,stimulus,mean,sd`` CSV.

    Args:
        path: CSV path; defaults to the bundled table.
    """
    columns = ("material", "stimulus", "mean", "sd")
    cast = {"mean": float, "sd": float}
    if path is None:
        ref = resources.files("hapticsim") / "data" / RATINGS_FILE
        with ref.open("r", encoding="utf-8") as fh:
            rows = list(read_rows(fh, columns, cast=cast))
    else:
        rows = list(read_rows(path, columns, cast=cast))
    entries: dict[tuple[Material, str], RatingEntry] = {}
    for row in rows:
        key = (material_from_name(row["material"]), stimulus_from_label(row["stimulus"]).label)
        if key in entries:
            raise ConfigError(f"{key[0].value}.{key[1]}", "duplicate rating entry")
        entries[key] = RatingEntry(row["mean"], row["sd"])
    table = RatingTable(entries)
    _log.debug("loaded {n} rating entries", n=len(entries))
    return table


@lru_cache(maxsize=1)
def default_table() -> RatingTable:
    """The bundled rating table, loaded once."""
    return load_rating_table()


def predicted_rating(
    material: Material,
    stimulus: Stimulus | str,
    table: RatingTable | None = None,
) -> tuple[float, float]:
    """Exact table lookup of ``(mean, sd)``.

    Examples:
        >>> predicted_rating(Material.GLASS, "A1")
        (31.9, 11.72)
        >>> predicted_rating(Material.PLYWOOD, "N")
        (50.0, 0.0)
    """
    entry = (table or default_table()).lookup(material, stimulus)
    return entry.mean, entry.sd


def gaussian_overlap(m1: float, s1: float, m2: float, s2: float) -> float:
    """Overlap coefficient ∫ min(f1, f2) of two normal densities, in closed form.

    Uses the intersection points of the densities; a zero SD is treated as a point mass.
    """
    if s1 == 0 or s2 == 0:
        return 1.0 if (s1 == s2 and m1 == m2) else 0.0
    # order by (sd, mean) so the result is bit-identical for swapped arguments
    if (s1, m1) > (s2, m2):
        m1, s1, m2, s2 = m2, s2, m1, s1
    a = 1.0 / s1**2 - 1.0 / s2**2
    if a == 0.0 or math.isclose(s1, s2, rel_tol=0.0, abs_tol=1e-12):
        return float(2.0 * norm.cdf(-abs(m1 - m2) / (2.0 * s1)))
    # s1 < s2: the narrow density dominates between the two crossings
    b = -2.0 * (m1 / s1**2 - m2 / s2**2)
    c = m1**2 / s1**2 - m2**2 / s2**2 - 2.0 * math.log(s2 / s1)
    # stable quadratic roots; the far root goes to infinity as the SDs approach each other
    q = -0.5 * (b + math.copysign(math.sqrt(max(b * b - 4.0 * a * c, 0.0)), b))
    x1, x2 = sorted((q / a, c / q))
    narrow_tails = norm.cdf(x1, m1, s1) + norm.sf(x2, m1, s1)
    wide_middle = norm.cdf(x2, m2, s2) - norm.cdf(x1, m2, s2)
    return float(min(1.0, max(0.0, narrow_tails + wide_middle)))


def bhattacharyya_coefficient(m1: float, s1: float, m2: float, s2: float) -> float:
    """Bhattacharyya coefficient of two normal densities."""
    if s1 == 0 or s2 == 0:
        return 1.0 if (s1 == s2 and m1 == m2) else 0.0
    var = s1**2 + s2**2
    return float(math.sqrt(2.0 * s1 * s2 / var) * math.exp(-((m1 - m2) ** 2) / (4.0 * var)))


def overlap(
    a: tuple[Material, Stimulus | str],
    b: tuple[Material, Stimulus | str],
    *,
    metric: OverlapMetric = "ovl",
    table: RatingTable | None = None,
) -> float:
    """Similarity of two rating distributions, in [0, 1] and symmetric.

    Args:
        a: (material, stimulus) of the first cell.
        b: (material, stimulus) of the second cell.
        metric: ``"ovl"`` for the overlap coefficient, ``"bhattacharyya"`` for the
            Bhattacharyya coefficient.
        table: Rating table (bundled table by default).
    """
    tbl = table or default_table()
    ea = tbl.lookup(*a)
    eb = tbl.lookup(*b)
    if metric == "ovl":
        return gaussian_overlap(ea.mean, ea.sd, eb.mean, eb.sd)
    if metric == "bhattacharyya":
        return bhattacharyya_coefficient(ea.mean, ea.sd, eb.mean, eb.sd)
    raise ValueError(f"unknown overlap metric {metric!r}")


@dataclass(frozen=True, slots=True)
class RankedStimulus:
    """One row of a substitution ranking."""

    stimulus: Stimulus
    score: float
    direction_ok: bool


def _direction_ok(stimulus: Stimulus, rougher: bool | None) -> bool:
    if rougher is None or stimulus.label == "N":
        return True
    return stimulus.is_vibro if rougher else stimulus.is_pneumo


def rank_stimuli(
    physical: Material,
    virtual: Material,
    *,
    metric: OverlapMetric = "ovl",
    gate_direction: bool = True,
    tie_tolerance: float = 0.0,
    table: RatingTable | None = None,
) -> list[RankedStimulus]:
    """Rank all seven stimuli by how well they make ``physical`` feel like ``virtual``.

    Each stimulus is scored by ``overlap((physical, s), (virtual, N))``. With
    ``gate_direction`` the stimuli that move roughness the right way (vibration to make a
    surface rougher, inflation to make it smoother, plus N) come first. Scores within
    ``tie_tolerance`` of a group's best are treated as equal and ordered by energy.
    """
    tbl = table or default_table()
    target = tbl.lookup(virtual, "N")
    source_n = tbl.lookup(physical, "N")
    rougher: bool | None = None
    if target.mean != source_n.mean:
        rougher = target.mean > source_n.mean

    rows = [
        RankedStimulus(
            stimulus=s,
            score=overlap((physical, s), (virtual, "N"), metric=metric, table=tbl),
            direction_ok=_direction_ok(s, rougher),
        )
        for s in ALL_STIMULI
    ]
    rows.sort(
        key=lambda r: (
            gate_direction and not r.direction_ok,
            -r.score,
            r.stimulus.energy_rank,
        )
    )
    if tie_tolerance > 0:
        rows = _merge_ties(rows, tie_tolerance, gate_direction)
    return rows


def _merge_ties(
    rows: list[RankedStimulus], tolerance: float, gate_direction: bool
) -> list[RankedStimulus]:
    merged: list[RankedStimulus] = []
    i = 0
    while i < len(rows):
        leader = rows[i]
        group = [leader]
        j = i + 1
        while (
            j < len(rows)
            and leader.score - rows[j].score <= tolerance
            and (not gate_direction or rows[j].direction_ok == leader.direction_ok)
        ):
            group.append(rows[j])
            j += 1
        merged.extend(sorted(group, key=lambda r: r.stimulus.energy_rank))
        i = j
    return merged


def recommend_stimulus(
    physical: Material,
    virtual: Material,
    *,
    metric: OverlapMetric = "ovl",
    gate_direction: bool = True,
    tie_tolerance: float = 0.0,
    table: RatingTable | None = None,
) -> tuple[Stimulus, float]:
    """Best stimulus for rendering ``virtual`` on top of ``physical``.

    With ``gate_direction``, materials that rate differently bare-fingered always get an
    actuator: N is passed over in favour of the best-ranked vibration or inflation level.

    Raises:
        SubstitutionError: ``physical`` and ``virtual`` are the same material.
        UnknownEntryError: A material is not in the rating table (e.g. the baseline).
    """
    if physical is virtual:
        raise SubstitutionError(f"{physical.value} rendered as itself needs no stimulus")
    for material in (physical, virtual):
        if material.role is MaterialRole.BASELINE:
            raise UnknownEntryError(f"{material.value} is the baseline and has no rating row")
    tbl = table or default_table()
    ranking = rank_stimuli(
        physical,
        virtual,
        metric=metric,
        gate_direction=gate_direction,
        tie_tolerance=tie_tolerance,
        table=tbl,
    )
    best = ranking[0]
    if gate_direction and tbl.lookup(physical, "N").mean != tbl.lookup(virtual, "N").mean:
        best = next(r for r in ranking if r.stimulus.label != "N")
    _log.debug(
        "recommend {stimulus} for {physical} as {virtual}",
        stimulus=best.stimulus.label,
        physical=physical.value,
        virtual=virtual.value,
        score=round(best.score, 4),
    )
    return best.stimulus, best.score
