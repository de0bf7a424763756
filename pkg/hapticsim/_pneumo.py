"""Closed-loop pneumatic pressure control against a simulated tube.

The plant is a first-order model of a pump feeding a closed tube with a leak:

    dp/dt = (k_P / V) · (inflow(duty, p) − leak·p)

with ``inflow = duty·(F_max − droop·p)`` while pumping and ``duty·F_vent`` while venting.
A 20 Hz pressure sensor (noise, quantization, zero-order hold) feeds a positional PID
running every 0.05 s; the plant is integrated with explicit Euler at 1 ms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import numpy.typing as npt

from ._errors import RangeError
from ._log import get_logger
from ._types import MAX_PNEUMO_PRESSURE, PidGains

FloatArray = npt.NDArray[np.float64]

K_P = 101.325
"""Volume-to-pressure constant (atmospheric pressure, kPa); dp = k_P · dV / V."""

PRESSURE_CLAMP = (0.0, 15.0)
INNER_DT = 0.001
BAND_KPA = 0.5
"""Half-width of the band whose first entry ends the proportional stage."""
STABLE_WINDOW_S = 5.0
TAIL_S = 1.5
"""Time simulated after the setpoint returns to zero."""
SETTLE_TIMEOUT_S = 5.0

REFERENCE_STEP_METRICS: dict[int, tuple[float, float, float, float]] = {
    1: (0.48, 0.91, 0.48, 0.88),
    2: (0.61, 1.18, 0.39, 0.94),
    3: (0.45, 0.97, 0.38, 0.91),
    4: (0.45, 1.10, 0.40, 1.11),
    5: (0.23, 0.74, 0.34, 1.12),
    6: (0.51, 0.86, 0.41, 1.09),
    7: (1.04, 1.31, 0.31, 0.89),
    8: (0.70, 1.14, 0.38, 0.85),
    9: (0.98, 1.12, 0.43, 1.08),
    10: (0.72, 1.20, 0.35, 0.97),
    11: (1.00, 2.20, 0.40, 1.12),
    12: (0.99, 2.07, 0.37, 0.92),
}
"""Measured (mae_prop, mme_prop, mae_stable, mme_stable) per target, kPa. Reference only."""

REFERENCE_AVERAGES = (0.679, 1.233, 0.386, 0.990)
REFERENCE_ACTIVATION_S = 0.14583
REFERENCE_DEACTIVATION_S = 0.32917

_log = get_logger("pneumo")


@dataclass(frozen=True, slots=True)
class PlantParams:
    """Pump, tube and sensor parameters.

    Defaults are the checked-in calibration.

    Attributes:
        tube_volume: Tube volume, mL.
        pump_max_flow: Pump flow at zero back-pressure, mL/s.
        pump_flow_droop: Flow lost per kPa of back-pressure, mL/s/kPa.
        leak_coeff: Leak flow per kPa, mL/s/kPa.
        valve_vent_flow: Vent flow at full negative duty, mL/s.
        sensor_rate: Sensor sampling rate, Hz.
        sensor_noise_sd: Gaussian noise SD, kPa.
        sensor_noise_clip: Noise is truncated to ± this value, kPa.
        sensor_quantization: Reading resolution, kPa (0 disables).
    """

    tube_volume: float = 5.0
    pump_max_flow: float = 3.525
    pump_flow_droop: float = 0.0775
    leak_coeff: float = 0.04
    valve_vent_flow: float = 1.2
    sensor_rate: float = 20.0
    sensor_noise_sd: float = 0.3
    sensor_noise_clip: float = 0.5
    sensor_quantization: float = 0.05

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            if getattr(self, name) < 0:
                raise RangeError(f"{name} must be non-negative")
        if self.tube_volume <= 0:
            raise RangeError("tube_volume must be positive")
        if self.sensor_rate <= 0:
            raise RangeError("sensor_rate must be positive")

    @property
    def pressure_gain(self) -> float:
        """k_P / V, kPa per mL."""
        return K_P / self.tube_volume

    def without_noise(self) -> PlantParams:
        return replace(self, sensor_noise_sd=0.0)


@dataclass(frozen=True, slots=True)
class PlantState:
    """Tube state: time (s), gauge pressure (kPa), last applied pump duty."""

    t: float = 0.0
    pressure: float = 0.0
    pump_duty: float = 0.0

    def __post_init__(self) -> None:
        lo, hi = PRESSURE_CLAMP
        if not lo <= self.pressure <= hi:
            raise RangeError(f"pressure must be within [{lo}, {hi}] kPa")
        if not -1.0 <= self.pump_duty <= 1.0:
            raise RangeError("pump_duty must be within [-1, 1]")


def _pressure_rate(pressure: float, duty: float, params: PlantParams) -> float:
    if duty >= 0.0:
        inflow = duty * (params.pump_max_flow - params.pump_flow_droop * pressure)
    else:
        inflow = duty * params.valve_vent_flow
    return params.pressure_gain * (inflow - params.leak_coeff * pressure)


def _euler(pressure: float, duty: float, dt: float, params: PlantParams) -> float:
    lo, hi = PRESSURE_CLAMP
    nxt = pressure + dt * _pressure_rate(pressure, duty, params)
    return lo if nxt < lo else hi if nxt > hi else nxt


def plant_step(state: PlantState, duty: float, dt: float, params: PlantParams) -> PlantState:
    """Advance the tube by one explicit-Euler step.

    ``duty`` is clamped to [-1, 1] and the resulting pressure to [0, 15] kPa.

    Raises:
        RangeError: If ``dt`` is not in (0, 0.01] s.
    """
    if not 0.0 < dt <= 0.01:
        raise RangeError("dt must be in (0, 0.01] s")
    duty = min(1.0, max(-1.0, duty))
    return PlantState(
        t=state.t + dt,
        pressure=_euler(state.pressure, duty, dt, params),
        pump_duty=duty,
    )


def equilibrium_pressure(duty: float, params: PlantParams) -> float:
    """Pressure where inflow equals leak for a constant non-negative duty (unclamped)."""
    if duty <= 0.0:
        return 0.0
    return duty * params.pump_max_flow / (duty * params.pump_flow_droop + params.leak_coeff)


@dataclass(frozen=True, slots=True)
class PidState:
    """Controller memory between ticks."""

    integral: float = 0.0
    prev_error: float | None = None
    output: float = 0.0


def pid_tick(
    setpoint: float,
    measurement: float,
    gains: PidGains,
    state: PidState | None = None,
) -> tuple[float, PidState]:
    """One positional PID update.

    The integral is clamped to the output limits and frozen while the output is saturated
    in the direction the error pushes (conditional integration). The derivative acts on the
    error and is zero on the first tick.

    Returns:
        ``(duty, new_state)``.

    Examples:
        >>> duty, _ = pid_tick(10.0, 0.0, PidGains(kp=0.05, ki=0.0))
        >>> round(duty, 3)
        0.5
    """
    prev = state or PidState()
    lo, hi = gains.output_limits
    error = setpoint - measurement
    proportional = gains.kp * error
    derivative = 0.0
    if prev.prev_error is not None and gains.kd:
        derivative = gains.kd * (error - prev.prev_error) / gains.sample_period
    candidate = min(hi, max(lo, prev.integral + gains.ki * error * gains.sample_period))
    raw = proportional + candidate + derivative
    integral = candidate
    if (raw > hi and error > 0) or (raw < lo and error < 0):
        integral = prev.integral
    duty = min(hi, max(lo, proportional + integral + derivative))
    return duty, PidState(integral=integral, prev_error=error, output=duty)


class PidController:
    """Stateful wrapper around :func:`pid_tick`; ticked by one owner at a time."""

    def __init__(self, gains: PidGains) -> None:
        self.gains = gains
        self.state = PidState()

    def tick(self, setpoint: float, measurement: float) -> float:
        duty, self.state = pid_tick(setpoint, measurement, self.gains, self.state)
        return duty

    def reset(self) -> None:
        self.state = PidState()


class PressureSensor:
    """Noisy, quantized gauge pressure sensor."""

    def __init__(self, params: PlantParams, rng: np.random.Generator) -> None:
        self.params = params
        self.rng = rng

    def read(self, pressure: float) -> float:
        p = self.params
        value = pressure
        if p.sensor_noise_sd > 0:
            noise = float(self.rng.normal(0.0, p.sensor_noise_sd))
            if p.sensor_noise_clip > 0:
                noise = min(p.sensor_noise_clip, max(-p.sensor_noise_clip, noise))
            value += noise
        if p.sensor_quantization > 0:
            value = round(value / p.sensor_quantization) * p.sensor_quantization
        return max(0.0, value)


class PneumaticChannel:
    """Sensor, controller and tube advanced together on a 1 ms clock.

    On every tick the sensor samples (when due), the controller updates (when due) from
    the latest reading, and the plant integrates one inner step with the held duty.
    """

    def __init__(
        self,
        plant: PlantParams,
        gains: PidGains,
        rng: np.random.Generator,
        *,
        inner_dt: float = INNER_DT,
    ) -> None:
        self.plant = plant
        self.inner_dt = inner_dt
        self.control_every = max(1, round(gains.sample_period / inner_dt))
        self.sensor_every = max(1, round(1.0 / (plant.sensor_rate * inner_dt)))
        self.controller = PidController(gains)
        self.sensor = PressureSensor(plant, rng)
        self.setpoint = 0.0
        self.pressure = 0.0
        self.reading = 0.0
        self.duty = 0.0
        self.ticks = 0

    @property
    def t(self) -> float:
        return self.ticks * self.inner_dt

    @property
    def is_idle(self) -> bool:
        return self.setpoint == 0.0 and self.pressure < BAND_KPA

    def step(self) -> None:
        if self.ticks % self.sensor_every == 0:
            self.reading = self.sensor.read(self.pressure)
        if self.ticks % self.control_every == 0:
            self.duty = self.controller.tick(self.setpoint, self.reading)
        self.pressure = _euler(self.pressure, self.duty, self.inner_dt, self.plant)
        self.ticks += 1


@dataclass(frozen=True, slots=True)
class StepMetrics:
    """Tracking quality of one step response (kPa and seconds)."""

    mae_prop: float
    mme_prop: float
    mae_stable: float
    mme_stable: float
    activation_time: float
    deactivation_time: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.mae_prop <= self.mme_prop + 1e-12):
            raise RangeError("proportional stage must satisfy mme >= mae >= 0")
        if not (0.0 <= self.mae_stable <= self.mme_stable + 1e-12):
            raise RangeError("stable stage must satisfy mme >= mae >= 0")

    @classmethod
    def zero(cls) -> StepMetrics:
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True, slots=True, eq=False)
class StepTrace:
    """1 ms record of a step response.

    ``measured`` is the zero-order-held sensor reading; ``pressure`` is the true tube
    pressure.
    """

    target: float
    t: FloatArray
    setpoint: FloatArray
    measured: FloatArray
    duty: FloatArray
    pressure: FloatArray
    band_entry_time: float | None
    setpoint_off_time: float | None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def overshoot(self) -> float:
        """Peak true pressure above target while the setpoint is held, kPa."""
        if self.target == 0 or self.setpoint_off_time is None:
            return 0.0
        on = self.setpoint > 0
        return max(0.0, float(self.pressure[on].max()) - self.target)


def _stage_errors(readings: list[float], target: float) -> tuple[float, float]:
    if not readings:
        return 0.0, 0.0
    err = np.abs(np.asarray(readings) - target)
    return float(err.mean()), float(err.max())


def run_step_response(
    target: float,
    hold: float = 6.0,
    gains: PidGains | None = None,
    plant: PlantParams | None = None,
    seed: int = 0,
) -> tuple[StepTrace, StepMetrics]:
    """Simulate a 0 → ``target`` → 0 step and score it.

    The setpoint is raised at t = 0. The proportional stage runs until the first sensor
    reading within ±0.5 kPa of target; the setpoint is then held for ``hold`` seconds and
    the stable stage is the final 5 s of that hold. Afterwards the setpoint returns to 0
    for a 1.5 s tail. Errors are computed on sensor readings; activation time (to 90 % of
    target) and deactivation time (to below 10 % after the setpoint drops) use the true
    pressure. A time that is never reached is reported as ``inf``.

    Args:
        target: Target pressure, kPa, in [0, 12].
        hold: Hold time after band entry, seconds, at least 5.
        gains: Controller gains (defaults to calibrated values).
        plant: Plant parameters (defaults to calibrated values).
        seed: Seed of the sensor noise generator.

    Raises:
        RangeError: Target outside [0, 12] kPa or hold shorter than 5 s.
    """
    if target < 0:
        raise RangeError("target pressure must be non-negative")
    if target > MAX_PNEUMO_PRESSURE:
        raise RangeError(
            f"target {target} kPa exceeds {MAX_PNEUMO_PRESSURE} kPa; the tube deforms "
            "unevenly above this pressure"
        )
    if hold < STABLE_WINDOW_S:
        raise RangeError(f"hold must be at least {STABLE_WINDOW_S} s")
    gains = gains or PidGains()
    plant = plant or PlantParams()

    if target == 0:
        n = round((hold + TAIL_S) / INNER_DT)
        t = np.arange(n, dtype=np.float64) * INNER_DT
        zeros = np.zeros(n)
        trace = StepTrace(0.0, t, zeros, zeros.copy(), zeros.copy(), zeros.copy(), None, None)
        return trace, StepMetrics.zero()

    channel = PneumaticChannel(plant, gains, np.random.default_rng(seed))
    hold_ticks = round(hold / INNER_DT)
    tail_ticks = round(TAIL_S / INNER_DT)
    stable_ticks = round(STABLE_WINDOW_S / INNER_DT)
    timeout_ticks = round(SETTLE_TIMEOUT_S / INNER_DT)

    t_rec: list[float] = []
    sp_rec: list[float] = []
    meas_rec: list[float] = []
    duty_rec: list[float] = []
    p_rec: list[float] = []
    prop_readings: list[float] = []
    stable_readings: list[float] = []
    band_tick: int | None = None
    off_tick: int | None = None
    activation: float | None = None
    deactivation: float | None = None

    channel.setpoint = target
    while True:
        tick = channel.ticks
        if off_tick is not None and tick >= off_tick + tail_ticks:
            break
        if band_tick is None and tick >= timeout_ticks:
            # never settled; hold from here so the stable stage is still defined
            band_tick = tick
            off_tick = tick + hold_ticks
            _log.warning("no band entry within {s} s", s=SETTLE_TIMEOUT_S, target=target)
        if off_tick is not None and tick == off_tick:
            channel.setpoint = 0.0
        sensing = tick % channel.sensor_every == 0
        pressure_now = channel.pressure
        channel.step()
        if sensing:
            reading = channel.reading
            if band_tick is None:
                prop_readings.append(reading)
                if abs(reading - target) <= BAND_KPA:
                    band_tick = tick
                    off_tick = tick + hold_ticks
            elif off_tick is not None and off_tick - stable_ticks <= tick < off_tick:
                stable_readings.append(reading)
        if activation is None and pressure_now >= 0.9 * target:
            activation = tick * INNER_DT
        if (
            deactivation is None
            and off_tick is not None
            and tick >= off_tick
            and pressure_now < 0.1 * target
        ):
            deactivation = (tick - off_tick) * INNER_DT
        t_rec.append(tick * INNER_DT)
        sp_rec.append(channel.setpoint)
        meas_rec.append(channel.reading)
        duty_rec.append(channel.duty)
        p_rec.append(pressure_now)

    mae_prop, mme_prop = _stage_errors(prop_readings, target)
    mae_stable, mme_stable = _stage_errors(stable_readings, target)
    metrics = StepMetrics(
        mae_prop=mae_prop,
        mme_prop=mme_prop,
        mae_stable=mae_stable,
        mme_stable=mme_stable,
        activation_time=activation if activation is not None else math.inf,
        deactivation_time=deactivation if deactivation is not None else math.inf,
    )
    trace = StepTrace(
        target=target,
        t=np.asarray(t_rec),
        setpoint=np.asarray(sp_rec),
        measured=np.asarray(meas_rec),
        duty=np.asarray(duty_rec),
        pressure=np.asarray(p_rec),
        band_entry_time=None if band_tick is None else band_tick * INNER_DT,
        setpoint_off_time=None if off_tick is None else off_tick * INNER_DT,
    )
    _log.debug(
        "step {target} kPa: stable MAE {mae:.3f}",
        target=target,
        mae=mae_stable,
        activation_s=metrics.activation_time,
        deactivation_s=metrics.deactivation_time,
    )
    return trace, metrics


_LIFT_P = np.array([0.0, 6.0, 8.0, 10.0, 12.0])
_LIFT_MM = np.array([0.0, 2.24, 3.36, 4.07, 4.07 + 2.0 * (4.07 - 3.36) / 2.0])


def _check_pressure(pressure: float) -> None:
    if not 0.0 <= pressure <= MAX_PNEUMO_PRESSURE:
        raise RangeError(f"pressure {pressure} kPa outside [0, {MAX_PNEUMO_PRESSURE}]")


def pressure_to_lift(pressure: float) -> float:
    """Fingertip lift in mm for an inflation pressure.

    Piecewise-linear through (0, 0), (6, 2.24), (8, 3.36), (10, 4.07), extended to 12 kPa
    with the slope of the last segment.

    Examples:
        >>> round(pressure_to_lift(7.0), 2)
        2.8
    """
    _check_pressure(pressure)
    return float(np.interp(pressure, _LIFT_P, _LIFT_MM))


AREA_FORCES_N = np.array([0.75, 1.0, 1.5])
AREA_PRESSURES_KPA = np.array([0.0, 6.0, 8.0, 10.0])
AREA_REDUCTION_PCT = np.array(
    [
        [0.0, 12.8, 25.5, 39.6],
        [0.0, 8.6, 15.2, 28.8],
        [0.0, 8.1, 11.9, 20.8],
    ]
)
"""Measured contact-area reduction, percent; rows follow AREA_FORCES_N."""
FORCE_RANGE_N = (0.3, 1.5)


def _row_at(row: FloatArray, pressure: float) -> float:
    if pressure <= AREA_PRESSURES_KPA[-1]:
        return float(np.interp(pressure, AREA_PRESSURES_KPA, row))
    slope = (row[-1] - row[-2]) / (AREA_PRESSURES_KPA[-1] - AREA_PRESSURES_KPA[-2])
    return float(row[-1] + slope * (pressure - AREA_PRESSURES_KPA[-1]))


def contact_area_reduction(pressure: float, normal_force: float) -> float:
    """Fraction of finger contact area removed by inflation.

    Bilinear interpolation on the measured 3×3 grid (forces 0.75/1.0/1.5 N by pressures
    6/8/10 kPa), falling linearly to 0 at 0 kPa. Force is clamped to the grid edges;
    pressures above 10 kPa extend the last segment.

    Examples:
        >>> round(contact_area_reduction(10.0, 1.5), 3)
        0.208
    """
    _check_pressure(pressure)
    lo, hi = FORCE_RANGE_N
    if not lo <= normal_force <= hi:
        raise RangeError(f"normal force {normal_force} N outside [{lo}, {hi}]")
    per_force = np.array([_row_at(row, pressure) for row in AREA_REDUCTION_PCT])
    pct = float(np.interp(normal_force, AREA_FORCES_N, per_force))
    return min(1.0, max(0.0, pct / 100.0))
