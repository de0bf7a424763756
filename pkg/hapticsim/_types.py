"""Shared domain vocabulary for hapticsim.

Units are fixed at the type level: kPa for pressure, mm for length, m/s² for
acceleration, seconds for time. Conversions only happen where files and wire
messages are parsed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TypedDict

from ._errors import NyquistError, RangeError, UnknownLabelError, UnknownMaterialError

MAX_VIBRO_ACCEL = 10.0
"""Upper bound of a vibrotactile level, m/s²."""

MAX_PNEUMO_PRESSURE = 12.0
"""Validated pneumatic range, kPa. Above it the tube deforms unevenly."""


class StimulusKind(Enum):
    """Which actuator a stimulus drives."""

    NONE = "none"
    VIBRO = "vibro"
    PNEUMO = "pneumo"


class MaterialRole(Enum):
    """Role of a material in the rating experiment."""

    TEST = "test"
    BASELINE = "baseline"


class Material(Enum):
    """Physical surface materials.

    The value is the canonical name used in every file format and protocol message.
    """

    GLASS = "Glass"
    CERAMICS = "Ceramics"
    PAPER = "Paper"
    PLYWOOD = "Plywood"
    BALSA_WOOD = "BalsaWood"
    COTTON = "Cotton"
    LEATHER = "Leather"

    @property
    def role(self) -> MaterialRole:
        if self is Material.PLYWOOD:
            return MaterialRole.BASELINE
        return MaterialRole.TEST


TEST_MATERIALS: tuple[Material, ...] = (
    Material.GLASS,
    Material.CERAMICS,
    Material.PAPER,
    Material.BALSA_WOOD,
    Material.COTTON,
    Material.LEATHER,
)
"""Rated materials, ordered from smoothest to roughest bare-finger rating."""

_MATERIAL_ALIASES: dict[str, Material] = {
    "wood": Material.BALSA_WOOD,
    "balsa": Material.BALSA_WOOD,
    "balsa-wood": Material.BALSA_WOOD,
    "ceramic": Material.CERAMICS,
}


def material_from_name(name: str) -> Material:
    """Resolve a material name, case-insensitively.

    Accepts canonical names (``"BalsaWood"``) and a few aliases (``"wood"``,
    ``"ceramic"``).

    Raises:
        UnknownMaterialError: If the name does not resolve.
    """
    key = name.strip().lower()
    for material in Material:
        if material.value.lower() == key:
            return material
    try:
        return _MATERIAL_ALIASES[key]
    except KeyError:
        raise UnknownMaterialError(name) from None


# label -> (kind, vibro_accel m/s², pneumo_pressure kPa)
_CANONICAL: dict[str, tuple[StimulusKind, float | None, float | None]] = {
    "N": (StimulusKind.NONE, None, None),
    "A1": (StimulusKind.VIBRO, 3.7, None),
    "A2": (StimulusKind.VIBRO, 4.9, None),
    "A3": (StimulusKind.VIBRO, 6.2, None),
    "B1": (StimulusKind.PNEUMO, None, 6.0),
    "B2": (StimulusKind.PNEUMO, None, 8.0),
    "B3": (StimulusKind.PNEUMO, None, 10.0),
}

STIMULUS_LABELS: tuple[str, ...] = ("N", "A1", "A2", "A3", "B1", "B2", "B3")
"""Canonical labels in presentation order."""

RATING_ORDER: tuple[str, ...] = ("A3", "A2", "A1", "N", "B1", "B2", "B3")
"""Labels from roughest to smoothest expected rating."""

ENERGY_ORDER: tuple[str, ...] = ("N", "A1", "B1", "A2", "B2", "A3", "B3")
"""Labels by increasing actuation energy; breaks ties in recommendations."""


@dataclass(frozen=True, slots=True)
class Stimulus:
    """One of the seven canonical haptic stimuli.

    Build instances with :func:`stimulus_from_label`; the constructor only checks that the
    fields agree with the canonical table.

    Attributes:
        kind: Actuator the stimulus drives.
        label: Canonical label (N, A1-A3, B1-B3).
        vibro_accel: Peak acceleration at 250 Hz in m/s², present iff ``kind`` is VIBRO.
        pneumo_pressure: Target gauge pressure in kPa, present iff ``kind`` is PNEUMO.
    """

    kind: StimulusKind
    label: str
    vibro_accel: float | None = None
    pneumo_pressure: float | None = None

    def __post_init__(self) -> None:
        if self.label not in _CANONICAL:
            raise UnknownLabelError(self.label)
        if (self.kind, self.vibro_accel, self.pneumo_pressure) != _CANONICAL[self.label]:
            raise RangeError(f"stimulus fields do not match canonical label {self.label}")
        if self.vibro_accel is not None and not 0.0 < self.vibro_accel <= MAX_VIBRO_ACCEL:
            raise RangeError(f"vibro_accel must be in (0, {MAX_VIBRO_ACCEL}] m/s²")
        if self.pneumo_pressure is not None and not (
            0.0 < self.pneumo_pressure <= MAX_PNEUMO_PRESSURE
        ):
            raise RangeError(f"pneumo_pressure must be in (0, {MAX_PNEUMO_PRESSURE}] kPa")

    @property
    def is_vibro(self) -> bool:
        return self.kind is StimulusKind.VIBRO

    @property
    def is_pneumo(self) -> bool:
        return self.kind is StimulusKind.PNEUMO

    @property
    def energy_rank(self) -> int:
        """Position in :data:`ENERGY_ORDER` (0 for N)."""
        return ENERGY_ORDER.index(self.label)

    def __str__(self) -> str:
        return self.label


def stimulus_from_label(label: str) -> Stimulus:
    """Return the canonical stimulus for a label.

    Args:
        label: One of N, A1, A2, A3, B1, B2, B3 (case-insensitive).

    Returns:
        The matching :class:`Stimulus`.

    Raises:
        UnknownLabelError: If the label is not canonical.

    Examples:
        >>> stimulus_from_label("a3").vibro_accel
        6.2
        >>> stimulus_from_label("B1").pneumo_pressure
        6.0
    """
    key = label.strip().upper()
    if key not in _CANONICAL:
        raise UnknownLabelError(label)
    kind, accel, pressure = _CANONICAL[key]
    return Stimulus(kind=kind, label=key, vibro_accel=accel, pneumo_pressure=pressure)


ALL_STIMULI: tuple[Stimulus, ...] = tuple(stimulus_from_label(s) for s in STIMULUS_LABELS)


@dataclass(frozen=True, slots=True)
class WaveformParams:
    """Parameters of the speed-driven sinusoidal drive signal.

    Attributes:
        amplitude: Drive amplitude in normalized full-scale units, [0, 1].
        wavelength_mm: Spatial wavelength of the virtual surface.
        phase: Initial phase in radians.
        render_rate: Frames per second delivered to the actuator.
        sample_rate: Drive samples per second.
        max_speed_mm_s: Highest finger speed the configuration must render without aliasing.
    """

    amplitude: float = 1.0
    wavelength_mm: float = 1.0
    phase: float = 0.0
    render_rate: int = 1000
    sample_rate: int = 3000
    max_speed_mm_s: float = 400.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.amplitude <= 1.0:
            raise RangeError("amplitude must be in [0, 1]")
        if self.wavelength_mm <= 0:
            raise RangeError("wavelength_mm must be positive")
        if self.render_rate <= 0 or self.sample_rate <= 0:
            raise RangeError("render_rate and sample_rate must be positive")
        if self.sample_rate % self.render_rate != 0:
            raise RangeError("sample_rate must be a whole multiple of render_rate")
        if self.max_speed_mm_s < 0:
            raise RangeError("max_speed_mm_s must be non-negative")
        if self.sample_rate < 2.0 * self.max_speed_mm_s / self.wavelength_mm:
            raise NyquistError(
                f"sample_rate {self.sample_rate} Hz cannot render "
                f"{self.max_speed_mm_s} mm/s at wavelength {self.wavelength_mm} mm"
            )

    @property
    def block_size(self) -> int:
        """Samples per rendered frame."""
        return self.sample_rate // self.render_rate


@dataclass(frozen=True, slots=True)
class PidGains:
    """PID controller gains and timing.

    Attributes:
        kp: Proportional gain (duty per kPa).
        ki: Integral gain (duty per kPa·s).
        kd: Derivative gain (duty·s per kPa).
        sample_period: Controller period in seconds.
        output_limits: (min, max) pump duty, within [-1, 1].
    """

    kp: float = 0.2
    ki: float = 1.0
    kd: float = 0.0
    sample_period: float = 0.05
    output_limits: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self) -> None:
        if min(self.kp, self.ki, self.kd) < 0:
            raise RangeError("PID gains must be non-negative")
        if self.sample_period <= 0:
            raise RangeError("sample_period must be positive")
        lo, hi = self.output_limits
        if not -1.0 <= lo < hi <= 1.0:
            raise RangeError("output_limits must satisfy -1 <= min < max <= 1")


class PlantConfig(TypedDict, total=False):
    """JSON shape of the ``plant`` section of a controller config."""

    tube_volume: float
    pump_max_flow: float
    pump_flow_droop: float
    leak_coeff: float
    valve_vent_flow: float
    sensor_rate: float
    sensor_noise_sd: float
    sensor_noise_clip: float
    sensor_quantization: float


class GainsConfig(TypedDict, total=False):
    """JSON shape of the ``gains`` section of a controller config."""

    kp: float
    ki: float
    kd: float
    sample_period: float
    output_limits: list[float]
