"""Synthetic fingertip trajectories and low-rate velocity estimation.

Trajectories stand in for the 30 Hz top-view hand tracker. The estimator smooths
landmark positions with an exponential moving average, differentiates, and
upsamples the speed to the drive rate.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import Literal, Protocol

import numpy as np
import numpy.typing as npt

from ._errors import RangeError, TooFewSamplesError
from ._log import get_logger

FloatArray = npt.NDArray[np.float64]

CAPTURE_RATE = 30.0
"""Landmark capture rate, Hz."""

MAX_SPEED_MM_S = 400.0
"""Highest finger speed a synthetic profile may ask for."""

DEFAULT_PIPELINE_BUDGET_S = 0.05353
"""Capture + estimation + synthesis latency of the velocity path."""

_log = get_logger("tracking")


@dataclass(frozen=True, slots=True)
class LandmarkSample:
    """Fingertip position in the surface plane at time ``t`` (s), in mm."""

    t: float
    x: float
    y: float


class SpeedProfile(Protocol):
    """A planar fingertip path with a closed-form ground truth."""

    def position(self, t: FloatArray) -> tuple[FloatArray, FloatArray]: ...

    def speed(self, t: FloatArray) -> FloatArray: ...

    def distance(self, t: float) -> float: ...


def _check_speed(value: float, name: str) -> None:
    if not 0.0 <= value <= MAX_SPEED_MM_S:
        raise RangeError(f"{name} must be within [0, {MAX_SPEED_MM_S}] mm/s, got {value}")


@dataclass(frozen=True, slots=True)
class ConstantSpeed:
    """Straight slide at a constant speed.

    Attributes:
        speed_mm_s: Finger speed.
        heading: Direction of travel in radians.
        origin: Start position (x, y) in mm.
    """

    speed_mm_s: float
    heading: float = 0.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        _check_speed(self.speed_mm_s, "speed_mm_s")

    def distance(self, t: float) -> float:
        return self.speed_mm_s * t

    def speed(self, t: FloatArray) -> FloatArray:
        return np.full_like(t, self.speed_mm_s, dtype=np.float64)

    def position(self, t: FloatArray) -> tuple[FloatArray, FloatArray]:
        s = self.speed_mm_s * t
        return (
            self.origin[0] + s * math.cos(self.heading),
            self.origin[1] + s * math.sin(self.heading),
        )


@dataclass(frozen=True, slots=True)
class SinusoidalSweep:
    """Straight slide whose speed oscillates between two bounds.

    Speed is ``mid - half * cos(2πt / period)``, so the slide starts at ``min_speed_mm_s``.
    """

    min_speed_mm_s: float
    max_speed_mm_s: float
    period_s: float = 1.0
    heading: float = 0.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        _check_speed(self.min_speed_mm_s, "min_speed_mm_s")
        _check_speed(self.max_speed_mm_s, "max_speed_mm_s")
        if self.min_speed_mm_s > self.max_speed_mm_s:
            raise RangeError("min_speed_mm_s must not exceed max_speed_mm_s")
        if self.period_s <= 0:
            raise RangeError("period_s must be positive")

    @property
    def _mid(self) -> float:
        return (self.min_speed_mm_s + self.max_speed_mm_s) / 2.0

    @property
    def _half(self) -> float:
        return (self.max_speed_mm_s - self.min_speed_mm_s) / 2.0

    def speed(self, t: FloatArray) -> FloatArray:
        return self._mid - self._half * np.cos(2.0 * np.pi * t / self.period_s)

    def _arc(self, t: FloatArray) -> FloatArray:
        omega = 2.0 * np.pi / self.period_s
        return self._mid * t - self._half * np.sin(omega * t) / omega

    def distance(self, t: float) -> float:
        return float(self._arc(np.asarray([t], dtype=np.float64))[0])

    def position(self, t: FloatArray) -> tuple[FloatArray, FloatArray]:
        s = self._arc(t)
        return (
            self.origin[0] + s * math.cos(self.heading),
            self.origin[1] + s * math.sin(self.heading),
        )


@dataclass(frozen=True, slots=True)
class Waypoints:
    """Piecewise-linear path through timed points ``(t, x, y)``.

    The finger rests at the last point after its timestamp.
    """

    points: tuple[tuple[float, float, float], ...]
    _t: FloatArray = field(init=False, repr=False, compare=False)
    _x: FloatArray = field(init=False, repr=False, compare=False)
    _y: FloatArray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise RangeError("waypoints need at least two points")
        arr = np.asarray(self.points, dtype=np.float64)
        t, x, y = arr[:, 0], arr[:, 1], arr[:, 2]
        if np.any(np.diff(t) <= 0):
            raise RangeError("waypoint timestamps must be strictly increasing")
        seg_speed = np.hypot(np.diff(x), np.diff(y)) / np.diff(t)
        if np.any(seg_speed > MAX_SPEED_MM_S):
            raise RangeError(f"waypoint segment faster than {MAX_SPEED_MM_S} mm/s")
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_y", y)

    def position(self, t: FloatArray) -> tuple[FloatArray, FloatArray]:
        return np.interp(t, self._t, self._x), np.interp(t, self._t, self._y)

    def speed(self, t: FloatArray) -> FloatArray:
        seg_speed = np.hypot(np.diff(self._x), np.diff(self._y)) / np.diff(self._t)
        idx = np.searchsorted(self._t, t, side="right") - 1
        inside = (idx >= 0) & (idx < len(seg_speed))
        out = np.zeros_like(t, dtype=np.float64)
        out[inside] = seg_speed[idx[inside]]
        return out

    def distance(self, t: float) -> float:
        grid = np.concatenate([self._t[self._t < t], [t]])
        grid = grid[grid >= self._t[0]]
        if len(grid) < 2:
            return 0.0
        x, y = self.position(grid)
        return float(np.hypot(np.diff(x), np.diff(y)).sum())


@dataclass(frozen=True, slots=True, eq=False)
class Trajectory:
    """Landmark samples of a synthetic slide plus its ground truth.

    Behaves as a read-only sequence of :class:`LandmarkSample`.
    """

    profile: SpeedProfile
    duration: float
    t: FloatArray
    x: FloatArray
    y: FloatArray

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, index: int) -> LandmarkSample:
        return LandmarkSample(float(self.t[index]), float(self.x[index]), float(self.y[index]))

    def __iter__(self) -> Iterator[LandmarkSample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def samples(self) -> list[LandmarkSample]:
        return list(self)

    @property
    def travel_mm(self) -> float:
        """Ground-truth distance covered over the whole duration."""
        return self.profile.distance(self.duration)

    def true_speed(self, t: float | FloatArray) -> FloatArray:
        return self.profile.speed(np.atleast_1d(np.asarray(t, dtype=np.float64)))


def _count(duration: float, rate: float) -> int:
    # round first so 0.1 s * 30 Hz gives 3, not 4
    return math.ceil(round(duration * rate, 9))


def synth_trajectory(
    profile: SpeedProfile,
    duration: float,
    *,
    capture_rate: float = CAPTURE_RATE,
) -> Trajectory:
    """Sample a profile at the capture rate.

    Samples are taken at ``t_k = k / capture_rate`` for ``k < ceil(duration * capture_rate)``.

    Args:
        profile: A :class:`ConstantSpeed`, :class:`SinusoidalSweep` or :class:`Waypoints`.
        duration: Length of the slide in seconds.
        capture_rate: Landmark rate in Hz.

    Raises:
        RangeError: If ``duration`` or ``capture_rate`` is not positive.

    Examples:
        >>> traj = synth_trajectory(ConstantSpeed(100.0), 1.0)
        >>> len(traj), traj.travel_mm
        (30, 100.0)
    """
    if duration <= 0:
        raise RangeError("duration must be positive")
    if capture_rate <= 0:
        raise RangeError("capture_rate must be positive")
    t = np.arange(_count(duration, capture_rate), dtype=np.float64) / capture_rate
    x, y = profile.position(t)
    return Trajectory(
        profile=profile,
        duration=duration,
        t=t,
        x=np.asarray(x, dtype=np.float64),
        y=np.asarray(y, dtype=np.float64),
    )


@dataclass(frozen=True, slots=True)
class SmoothingConfig:
    """Velocity estimator settings.

    Attributes:
        time_constant: EMA time constant in seconds (one capture frame by default).
        interpolation: ``"linear"`` or ``"zoh"`` upsampling.
        pipeline_budget: Latency reported for the whole velocity path, seconds.
        jitter_sd: Standard deviation of seeded latency jitter, seconds.
        seed: Seed for the jitter draw.
    """

    time_constant: float = 0.033
    interpolation: Literal["linear", "zoh"] = "linear"
    pipeline_budget: float = DEFAULT_PIPELINE_BUDGET_S
    jitter_sd: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.time_constant <= 0:
            raise RangeError("time_constant must be positive")
        if self.interpolation not in ("linear", "zoh"):
            raise RangeError("interpolation must be 'linear' or 'zoh'")
        if self.pipeline_budget < 0 or self.jitter_sd < 0:
            raise RangeError("pipeline_budget and jitter_sd must be non-negative")


@dataclass(frozen=True, slots=True, eq=False)
class VelocityTrace:
    """Finger speed sampled at a fixed rate.

    Attributes:
        rate: Samples per second.
        speeds: Non-negative speeds in mm/s.
        latency: Estimation delay in seconds.
        t0: Time of the first sample, seconds.
    """

    rate: float
    speeds: FloatArray
    latency: float = 0.0
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise RangeError("rate must be positive")
        if len(self.speeds) and (np.any(self.speeds < 0) or not np.all(np.isfinite(self.speeds))):
            raise RangeError("speeds must be finite and non-negative")

    def __len__(self) -> int:
        return len(self.speeds)

    @property
    def duration(self) -> float:
        return len(self.speeds) / self.rate

    @property
    def times(self) -> FloatArray:
        return self.t0 + np.arange(len(self.speeds), dtype=np.float64) / self.rate

    @classmethod
    def constant(cls, speed_mm_s: float, duration: float, rate: float = 3000.0) -> VelocityTrace:
        """A trace holding one speed, e.g. for rendering a fixed-speed tone."""
        _check_speed(speed_mm_s, "speed_mm_s")
        if duration <= 0:
            raise RangeError("duration must be positive")
        return cls(rate=rate, speeds=np.full(_count(duration, rate), float(speed_mm_s)))


def ema_group_delay(time_constant: float, sample_period: float) -> float:
    """Low-frequency group delay of the discrete EMA, seconds."""
    alpha = 1.0 - math.exp(-sample_period / time_constant)
    return sample_period * (1.0 - alpha) / alpha


def estimate_velocity(
    samples: Sequence[LandmarkSample] | Trajectory,
    out_rate: float = 3000.0,
    smoothing: SmoothingConfig | None = None,
) -> VelocityTrace:
    """Estimate finger speed from low-rate landmark samples.

    Positions are smoothed with an EMA (``alpha = 1 - exp(-dt / tau)``), differentiated
    by backward differences, and upsampled to ``out_rate``. The first speed is copied to
    the first sample. The output covers the capture span plus one capture period, so a
    1 s capture at 30 Hz yields ``ceil(1.0 * out_rate)`` samples.

    Args:
        samples: At least two samples with strictly increasing timestamps.
        out_rate: Output rate in Hz, at least 30.
        smoothing: Filter settings; defaults to :class:`SmoothingConfig`.

    Returns:
        A :class:`VelocityTrace` whose latency equals the configured pipeline budget plus
        any seeded jitter.

    Raises:
        TooFewSamplesError: Fewer than two samples.
        RangeError: Non-increasing timestamps, ``out_rate`` below 30 Hz, or a budget shorter
            than the filter's own group delay.
    """
    cfg = smoothing or SmoothingConfig()
    if isinstance(samples, Trajectory):
        t, x, y = samples.t, samples.x, samples.y
    else:
        if len(samples) < 2:
            raise TooFewSamplesError(f"need at least 2 samples, got {len(samples)}")
        t = np.fromiter((s.t for s in samples), dtype=np.float64, count=len(samples))
        x = np.fromiter((s.x for s in samples), dtype=np.float64, count=len(samples))
        y = np.fromiter((s.y for s in samples), dtype=np.float64, count=len(samples))
    if len(t) < 2:
        raise TooFewSamplesError(f"need at least 2 samples, got {len(t)}")
    if out_rate < CAPTURE_RATE:
        raise RangeError(f"out_rate must be at least {CAPTURE_RATE} Hz")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise RangeError("sample timestamps must be strictly increasing")

    alpha = 1.0 - np.exp(-dt / cfg.time_constant)
    xs = np.empty_like(x)
    ys = np.empty_like(y)
    xs[0], ys[0] = x[0], y[0]
    for k in range(1, len(t)):
        xs[k] = xs[k - 1] + alpha[k - 1] * (x[k] - xs[k - 1])
        ys[k] = ys[k - 1] + alpha[k - 1] * (y[k] - ys[k - 1])

    speeds = np.empty_like(t)
    speeds[1:] = np.hypot(np.diff(xs), np.diff(ys)) / dt
    speeds[0] = speeds[1]

    period = float(t[-1] - t[0]) / (len(t) - 1)
    n_out = _count(float(t[-1] - t[0]) + period, out_rate)
    out_t = t[0] + np.arange(n_out, dtype=np.float64) / out_rate
    if cfg.interpolation == "linear":
        out = np.interp(out_t, t, speeds)
    else:
        idx = np.clip(np.searchsorted(t, out_t, side="right") - 1, 0, len(t) - 1)
        out = speeds[idx]

    group_delay = ema_group_delay(cfg.time_constant, period)
    if cfg.pipeline_budget < group_delay:
        raise RangeError(
            f"pipeline budget {cfg.pipeline_budget * 1e3:.2f} ms is shorter than the "
            f"smoothing delay {group_delay * 1e3:.2f} ms"
        )
    latency = cfg.pipeline_budget
    if cfg.jitter_sd > 0:
        rng = np.random.default_rng(cfg.seed)
        latency = max(group_delay, latency + float(rng.normal(0.0, cfg.jitter_sd)))

    _log.debug(
        "estimated {n} speeds from {m} samples",
        n=n_out,
        m=len(t),
        latency_ms=round(latency * 1e3, 3),
    )
    return VelocityTrace(
        rate=out_rate,
        speeds=np.maximum(out, 0.0),
        latency=latency,
        t0=float(t[0]),
    )
