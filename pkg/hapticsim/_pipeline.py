"""End-to-end touch simulation on a single 1 kHz clock.

A scenario slides a finger along a synthetic trajectory while contact events go through
the stimulus scheduler. Vibrotactile commands drive the speed-following waveform;
pneumatic commands drive the pressure loop, whose pressure sets fingertip lift and
contact-area reduction. Everything derives from ``(config, seed)``, so the same inputs
always give byte-identical trace files.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from ._config import (
    as_int,
    as_mapping,
    as_number,
    gains_from_mapping,
    join_path,
    load_controller_config,
    load_document,
    plant_from_mapping,
    require,
    resolve_config,
)
from ._errors import ConfigError, HapticSimError, RangeError
from ._log import get_logger
from ._parse import write_rows
from ._pneumo import (
    BAND_KPA,
    REFERENCE_ACTIVATION_S,
    REFERENCE_DEACTIVATION_S,
    PlantParams,
    PneumaticChannel,
    contact_area_reduction,
    pressure_to_lift,
)
from ._protocol import EventKind, SessionEvent
from ._scheduler import SchedulerConfig, SchedulerMode, schedule
from ._tracking import (
    ConstantSpeed,
    SinusoidalSweep,
    SmoothingConfig,
    SpeedProfile,
    Waypoints,
    estimate_velocity,
    synth_trajectory,
)
from ._types import (
    MAX_PNEUMO_PRESSURE,
    Material,
    PidGains,
    Stimulus,
    WaveformParams,
    material_from_name,
    stimulus_from_label,
)
from ._vibro import WaveformStreamer, amplitude_for_accel
from .contrib.decorators import timed

FloatArray = npt.NDArray[np.float64]

CLOCK_HZ = 1000
TRACE_HEADER = (
    "t_ms",
    "speed_mm_s",
    "drive_rms",
    "pressure_kpa",
    "lift_mm",
    "area_reduction_pct",
    "event",
)
SCENARIO_SUBDIR = "scenarios"
MAX_DURATION_S = 600.0

_log = get_logger("pipeline")


@dataclass(frozen=True, slots=True)
class LatencyBudget:
    """Per-stage latency of the rendering path, milliseconds.

    Capture, estimation and synthesis add up to the transport delay between a contact or
    motion and the first drive sample. The actuation figures are the measured pneumatic
    activation and deactivation times the simulated plant is calibrated against.
    """

    capture: float = 33.33
    estimation: float = 19.20
    synthesis: float = 1.00
    actuation_on: float = round(REFERENCE_ACTIVATION_S * 1e3, 2)
    actuation_off: float = round(REFERENCE_DEACTIVATION_S * 1e3, 2)

    def __post_init__(self) -> None:
        for name in ("capture", "estimation", "synthesis", "actuation_on", "actuation_off"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise RangeError(f"{name} must be a non-negative number of ms")

    @property
    def vibro_ms(self) -> float:
        """End-to-end vibrotactile latency."""
        return self.capture + self.estimation + self.synthesis

    @property
    def transport_ticks(self) -> int:
        """Vibro latency rounded up to whole clock ticks."""
        return math.ceil(round(self.vibro_ms, 6))


@dataclass(frozen=True, slots=True)
class Contact:
    """Finger touching a physical material for ``[begin_ms, end_ms)``."""

    material: Material
    begin_ms: int
    end_ms: int

    def __post_init__(self) -> None:
        if not 0 <= self.begin_ms < self.end_ms:
            raise RangeError("contact needs 0 <= begin_ms < end_ms")


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    """A fully validated scenario.

    Build it with :meth:`from_mapping` (or :func:`load_scenario`) so validation errors carry
    the offending field path.
    """

    name: str
    duration_s: float
    seed: int
    profile: SpeedProfile
    contacts: tuple[Contact, ...]
    mapping: Mapping[Material, Stimulus]
    normal_force_n: float = 1.0
    mode: SchedulerMode = "experiment"
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    budget: LatencyBudget = field(default_factory=LatencyBudget)
    jitter_sd_ms: float = 0.0
    waveform: WaveformParams = field(default_factory=WaveformParams)
    plant: PlantParams = field(default_factory=PlantParams)
    gains: PidGains = field(default_factory=PidGains)
    exclusive_channels: bool = True
    document: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    @property
    def duration_ms(self) -> int:
        return round(self.duration_s * CLOCK_HZ)

    @classmethod
    def from_mapping(cls, doc: Mapping[str, Any]) -> ScenarioConfig:
        """Validate a schema-1 scenario document.

        Raises:
            ConfigError: With the dotted path of the first invalid field.
        """
        known = {
            "schema", "name", "duration_s", "seed", "trajectory", "contacts", "mapping",
            "normal_force_n", "mode", "refractory_ms", "max_stimulus_ms", "budget",
            "jitter_sd_ms", "waveform", "plant", "gains", "exclusive_channels",
        }  # fmt: skip
        for key in doc:
            if key not in known:
                raise ConfigError(key, "unknown field")
        name = require(doc, "name", "")
        if not isinstance(name, str) or not name:
            raise ConfigError("name", "expected a non-empty string")
        duration_s = as_number(require(doc, "duration_s", ""), "duration_s", minimum=0.1)
        if duration_s > MAX_DURATION_S:
            raise ConfigError("duration_s", f"must be <= {MAX_DURATION_S}")
        seed = as_int(doc.get("seed", 0), "seed", minimum=0)

        profile = _profile_from_mapping(as_mapping(require(doc, "trajectory", ""), "trajectory"))
        contacts = _contacts_from_list(require(doc, "contacts", ""), round(duration_s * CLOCK_HZ))
        mapping = _mapping_from_dict(as_mapping(require(doc, "mapping", ""), "mapping"))

        force = as_number(
            doc.get("normal_force_n", 1.0), "normal_force_n", minimum=0.3, maximum=1.5
        )
        mode = doc.get("mode", "experiment")
        if mode not in ("experiment", "bridge"):
            raise ConfigError("mode", "expected 'experiment' or 'bridge'")
        base = SchedulerConfig.for_mode(mode)
        scheduler = SchedulerConfig(
            max_stimulus_ms=as_int(
                doc.get("max_stimulus_ms", base.max_stimulus_ms), "max_stimulus_ms", minimum=1
            ),
            refractory_ms=as_int(
                doc.get("refractory_ms", base.refractory_ms), "refractory_ms", minimum=0
            ),
        )
        budget = _budget_from_mapping(as_mapping(doc.get("budget", {}), "budget"))
        jitter = as_number(doc.get("jitter_sd_ms", 0.0), "jitter_sd_ms", minimum=0.0)
        waveform = _waveform_from_mapping(as_mapping(doc.get("waveform", {}), "waveform"))

        base_plant, base_gains = load_controller_config()
        plant = plant_from_mapping(
            {**asdict(base_plant), **as_mapping(doc.get("plant", {}), "plant")}
        )
        gains_doc: dict[str, Any] = {**asdict(base_gains)}
        gains_doc["output_limits"] = list(base_gains.output_limits)
        gains_doc.update(as_mapping(doc.get("gains", {}), "gains"))
        gains = gains_from_mapping(gains_doc)

        exclusive = doc.get("exclusive_channels", True)
        if not isinstance(exclusive, bool):
            raise ConfigError("exclusive_channels", "expected true or false")

        return cls(
            name=name,
            duration_s=duration_s,
            seed=seed,
            profile=profile,
            contacts=contacts,
            mapping=mapping,
            normal_force_n=force,
            mode=mode,
            scheduler=scheduler,
            budget=budget,
            jitter_sd_ms=jitter,
            waveform=waveform,
            plant=plant,
            gains=gains,
            exclusive_channels=exclusive,
            document=dict(doc),
        )


def _profile_from_mapping(section: Mapping[str, Any]) -> SpeedProfile:
    path = "trajectory"
    kind = require(section, "profile", path)
    try:
        if kind == "constant":
            return ConstantSpeed(
                speed_mm_s=as_number(
                    require(section, "speed_mm_s", path), f"{path}.speed_mm_s", minimum=0.0
                ),
                heading=as_number(section.get("heading", 0.0), f"{path}.heading"),
            )
        if kind == "sweep":
            return SinusoidalSweep(
                min_speed_mm_s=as_number(
                    require(section, "min_speed_mm_s", path), f"{path}.min_speed_mm_s"
                ),
                max_speed_mm_s=as_number(
                    require(section, "max_speed_mm_s", path), f"{path}.max_speed_mm_s"
                ),
                period_s=as_number(section.get("period_s", 1.0), f"{path}.period_s"),
                heading=as_number(section.get("heading", 0.0), f"{path}.heading"),
            )
        if kind == "waypoints":
            raw = require(section, "points", path)
            if not isinstance(raw, list):
                raise ConfigError(f"{path}.points", "expected a list of [t_s, x_mm, y_mm]")
            points = []
            for i, point in enumerate(raw):
                point_path = join_path(f"{path}.points", i)
                if not isinstance(point, list) or len(point) != 3:
                    raise ConfigError(point_path, "expected [t_s, x_mm, y_mm]")
                t, x, y = (as_number(v, join_path(point_path, j)) for j, v in enumerate(point))
                points.append((t, x, y))
            return Waypoints(tuple(points))
    except ConfigError:
        raise
    except HapticSimError as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.profile", "expected 'constant', 'sweep' or 'waypoints'")


def _contacts_from_list(raw: Any, duration_ms: int) -> tuple[Contact, ...]:
    if not isinstance(raw, list):
        raise ConfigError("contacts", "expected a list")
    contacts = []
    for i, item in enumerate(raw):
        path = join_path("contacts", i)
        section = as_mapping(item, path)
        material = _material(require(section, "material", path), f"{path}.material")
        begin = as_int(require(section, "begin_ms", path), f"{path}.begin_ms", minimum=0)
        end = as_int(require(section, "end_ms", path), f"{path}.end_ms", minimum=0)
        if end <= begin:
            raise ConfigError(f"{path}.end_ms", "must be greater than begin_ms")
        if end > duration_ms:
            raise ConfigError(f"{path}.end_ms", f"must be <= the duration ({duration_ms} ms)")
        contacts.append(Contact(material, begin, end))
    return tuple(contacts)


def _material(value: Any, path: str) -> Material:
    if not isinstance(value, str):
        raise ConfigError(path, "expected a material name")
    try:
        return material_from_name(value)
    except HapticSimError as exc:
        raise ConfigError(path, str(exc)) from exc


def _mapping_from_dict(section: Mapping[str, Any]) -> dict[Material, Stimulus]:
    mapping: dict[Material, Stimulus] = {}
    for key, value in section.items():
        path = f"mapping.{key}"
        material = _material(key, path)
        if not isinstance(value, str):
            raise ConfigError(path, "expected a stimulus label")
        try:
            mapping[material] = stimulus_from_label(value)
        except HapticSimError as exc:
            raise ConfigError(path, str(exc)) from exc
    return mapping


def _budget_from_mapping(section: Mapping[str, Any]) -> LatencyBudget:
    defaults = LatencyBudget()
    values = {}
    for key, value in section.items():
        if key not in {"capture", "estimation", "synthesis", "actuation_on", "actuation_off"}:
            raise ConfigError(f"budget.{key}", "unknown field")
        values[key] = as_number(value, f"budget.{key}", minimum=0.0)
    merged = {**asdict(defaults), **values}
    return LatencyBudget(**merged)


def _waveform_from_mapping(section: Mapping[str, Any]) -> WaveformParams:
    values: dict[str, Any] = {}
    for key, value in section.items():
        path = f"waveform.{key}"
        if key in ("wavelength_mm", "phase"):
            values[key] = as_number(value, path)
        elif key == "sample_rate":
            values[key] = as_int(value, path, minimum=CLOCK_HZ)
        else:
            raise ConfigError(path, "unknown field")
    try:
        return WaveformParams(render_rate=CLOCK_HZ, **values)
    except HapticSimError as exc:
        raise ConfigError("waveform", str(exc)) from exc


def load_scenario(name: str | Path) -> ScenarioConfig:
    """Load a scenario by path or by bundled/configured name."""
    path = resolve_config(name, subdir=SCENARIO_SUBDIR)
    return ScenarioConfig.from_mapping(load_document(path))


def contact_events(contacts: Sequence[Contact]) -> list[SessionEvent]:
    """Contacts as a seq-ordered ContactBegin/ContactEnd stream (ends first on ties)."""
    timeline = []
    for contact in contacts:
        timeline.append((contact.begin_ms, 1, EventKind.CONTACT_BEGIN, contact.material))
        timeline.append((contact.end_ms, 0, EventKind.CONTACT_END, contact.material))
    timeline.sort(key=lambda item: (item[0], item[1]))
    return [
        SessionEvent(seq=i, t_ms=t, kind=kind, material=material)
        for i, (t, _, kind, material) in enumerate(timeline)
    ]


def event_label(event: SessionEvent) -> str:
    """Compact label for the trace ``event`` column, e.g. ``StimulusCmd:Glass/A1``."""
    label = event.kind.value
    if event.material is not None:
        label += f":{event.material.value}"
    if event.stimulus is not None:
        label += f"/{event.stimulus}"
    if event.deferred:
        label += "(deferred)"
    return label


@dataclass(frozen=True, slots=True, eq=False)
class SessionTrace:
    """Merged 1 kHz trace of one scenario run.

    Attributes:
        name: Scenario name.
        seed: Seed the run used.
        t_ms: Clock ticks.
        speed: Delayed speed estimate fed to the synthesizer at each tick, mm/s.
        drive_rms: RMS of each 1 ms drive frame.
        pressure: Plant pressure at the end of each tick, kPa.
        lift: Fingertip lift, mm.
        area_reduction: Contact-area reduction, percent.
        events: Per-tick scheduler input and output labels.
        drive: All drive samples at the waveform sample rate.
        commands: Scheduler output messages.
        summary: Headline figures of the run.
    """

    name: str
    seed: int
    t_ms: npt.NDArray[np.int64]
    speed: FloatArray
    drive_rms: FloatArray
    pressure: FloatArray
    lift: FloatArray
    area_reduction: FloatArray
    events: tuple[tuple[str, ...], ...]
    drive: FloatArray
    commands: tuple[SessionEvent, ...]
    summary: Mapping[str, Any]

    def __len__(self) -> int:
        return len(self.t_ms)


def _band_entry(pressure: FloatArray, target: float, onset: int) -> int | None:
    inside = np.nonzero(pressure[onset:] >= target - BAND_KPA)[0]
    return int(inside[0]) if len(inside) else None


def _delayed_speeds(config: ScenarioConfig, n_samples: int) -> tuple[FloatArray, float]:
    trajectory = synth_trajectory(config.profile, config.duration_s)
    smoothing = SmoothingConfig(
        pipeline_budget=config.budget.vibro_ms / 1e3,
        jitter_sd=config.jitter_sd_ms / 1e3,
        seed=config.seed,
    )
    rate = config.waveform.sample_rate
    trace = estimate_velocity(trajectory, out_rate=rate, smoothing=smoothing)
    delay = round(trace.latency * rate)
    speeds = np.concatenate([np.zeros(delay), trace.speeds])
    if len(speeds) < n_samples:
        speeds = np.concatenate([speeds, np.full(n_samples - len(speeds), trace.speeds[-1])])
    return speeds[:n_samples], trace.latency


@timed
def run_scenario(config: ScenarioConfig, *, seed: int | None = None) -> SessionTrace:
    """Simulate one scenario.

    Commands take effect after the transport delay of the budget. With
    ``exclusive_channels`` a vibrotactile start waits until the tube has deflated, so the
    two actuators never drive at once.

    Args:
        config: Validated scenario.
        seed: Overrides ``config.seed``.
    """
    seed = config.seed if seed is None else seed
    if seed != config.seed:
        config = replace(config, seed=seed)
    n_ticks = config.duration_ms
    block = config.waveform.block_size
    speeds, latency = _delayed_speeds(config, n_ticks * block)

    inputs = contact_events(config.contacts)
    commands = schedule(inputs, config.mapping, config.scheduler)
    events: dict[int, list[str]] = {}
    for event in (*inputs, *commands):
        if event.t_ms < n_ticks:
            events.setdefault(event.t_ms, []).append(event_label(event))

    transport = config.budget.transport_ticks
    actions: dict[int, list[Stimulus | None]] = {}
    for cmd in commands:
        if cmd.kind is EventKind.STIMULUS_CMD:
            assert cmd.stimulus is not None
            stim = None if cmd.is_stop else stimulus_from_label(cmd.stimulus)
            actions.setdefault(cmd.t_ms + transport, []).append(stim)

    streamer = WaveformStreamer(config.waveform)
    channel = PneumaticChannel(config.plant, config.gains, np.random.default_rng([seed, 1]))
    requested: Stimulus | None = None

    drive = np.empty(n_ticks * block)
    drive_rms = np.empty(n_ticks)
    pressure = np.empty(n_ticks)
    setpoints = np.zeros(n_ticks)
    vibro_on_ticks: list[int] = []
    pneumo_on_ticks: list[int] = []
    vibro_was_on = False
    pneumo_was_on = False

    for k in range(n_ticks):
        for action in actions.get(k, ()):
            requested = action

        vibro_on = requested is not None and requested.is_vibro
        if vibro_on and config.exclusive_channels and not channel.is_idle:
            vibro_on = False
        setpoint = 0.0
        if requested is not None and requested.is_pneumo and not vibro_on:
            assert requested.pneumo_pressure is not None
            setpoint = requested.pneumo_pressure

        amplitude = 0.0
        if vibro_on:
            assert requested is not None and requested.vibro_accel is not None
            amplitude = amplitude_for_accel(requested.vibro_accel)
        frame = streamer.push(speeds[k * block : (k + 1) * block], amplitude=amplitude)
        drive[k * block : (k + 1) * block] = frame.samples
        drive_rms[k] = frame.rms

        channel.setpoint = setpoint
        setpoints[k] = setpoint
        channel.step()
        pressure[k] = channel.pressure

        if vibro_on and not vibro_was_on:
            vibro_on_ticks.append(k)
        if setpoint > 0 and not pneumo_was_on:
            pneumo_on_ticks.append(k)
        vibro_was_on, pneumo_was_on = vibro_on, setpoint > 0

    clipped = np.clip(pressure, 0.0, MAX_PNEUMO_PRESSURE)
    lift = np.array([pressure_to_lift(float(p)) for p in clipped])
    area = np.array(
        [100.0 * contact_area_reduction(float(p), config.normal_force_n) for p in clipped]
    )

    summary = {
        "name": config.name,
        "seed": seed,
        "duration_ms": n_ticks,
        "vibro_latency_ms": round(latency * 1e3, 3),
        "transport_ms": transport,
        "commands": [c.stimulus for c in commands if c.kind is EventKind.STIMULUS_CMD],
        "deferred": sum(1 for c in commands if c.deferred),
        "errors": [c.reason for c in commands if c.kind is EventKind.ERROR],
        "vibro_on_ms": vibro_on_ticks,
        "pneumo_on_ms": pneumo_on_ticks,
        "pneumo_activation_ms": [
            _band_entry(pressure, float(setpoints[k]), k) for k in pneumo_on_ticks
        ],
        "peak_pressure_kpa": round(float(pressure.max()), 4),
        "max_lift_mm": round(float(lift.max()), 4),
        "max_area_reduction_pct": round(float(area.max()), 3),
    }
    _log.info(
        "scenario {name} ran {n} ms",
        name=config.name,
        n=n_ticks,
        seed=seed,
        stimuli=len(vibro_on_ticks) + len(pneumo_on_ticks),
    )
    return SessionTrace(
        name=config.name,
        seed=seed,
        t_ms=np.arange(n_ticks, dtype=np.int64),
        speed=speeds[::block].copy(),
        drive_rms=drive_rms,
        pressure=pressure,
        lift=lift,
        area_reduction=area,
        events=tuple(tuple(events.get(k, ())) for k in range(n_ticks)),
        drive=drive,
        commands=tuple(commands),
        summary=summary,
    )


def write_trace_csv(path: str | Path, trace: SessionTrace) -> Path:
    """Write the merged trace with fixed precision; events in one tick are ``;``-joined."""
    return write_rows(
        path,
        TRACE_HEADER,
        (
            (
                int(trace.t_ms[k]),
                f"{trace.speed[k]:.3f}",
                f"{trace.drive_rms[k]:.6f}",
                f"{trace.pressure[k]:.4f}",
                f"{trace.lift[k]:.4f}",
                f"{trace.area_reduction[k]:.3f}",
                ";".join(trace.events[k]),
            )
            for k in range(len(trace))
        ),
    )


def run_batch(configs: Sequence[ScenarioConfig], max_workers: int = 4) -> list[SessionTrace]:
    """Run independent scenarios on a thread pool; results follow the input order."""
    if max_workers < 1:
        raise ValueError("max_workers must be at least 1")
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run_scenario, configs))
