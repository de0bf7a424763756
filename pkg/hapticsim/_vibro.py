"""Speed-driven vibrotactile waveform synthesis.

The drive is ``Y = A·sin(θ)`` where the phase advances by ``2π·v/λ`` per second, so
the instantaneous frequency follows finger speed ``v`` over a virtual grating of
wavelength ``λ``. Phase is accumulated rather than computed as ``v(t)·t`` so that
frequency changes never cause phase jumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt
from scipy.io import wavfile

from ._errors import NyquistError, RangeError
from ._log import get_logger
from ._tracking import VelocityTrace
from ._types import WaveformParams

FloatArray = npt.NDArray[np.float64]

TWO_PI = 2.0 * math.pi

_log = get_logger("vibro")


@dataclass(frozen=True, slots=True, eq=False)
class DriveFrame:
    """One rendered block of drive samples.

    Attributes:
        t0: Start time of the block, seconds.
        samples: Drive values in [-1, 1]; length is ``sample_rate / frame_rate``.
        frame_rate: Frames per second.
    """

    t0: float
    samples: FloatArray
    frame_rate: int = 1000

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean(np.square(self.samples))))


@dataclass(frozen=True, slots=True)
class LraModel:
    """Linear resonant actuator calibration.

    The default pins the strongest level (6.2 m/s²) at full-scale drive.
    """

    resonant_freq: float = 250.0
    accel_per_unit_amplitude: float = 6.2

    def __post_init__(self) -> None:
        if self.resonant_freq <= 0:
            raise RangeError("resonant_freq must be positive")
        if self.accel_per_unit_amplitude <= 0:
            raise RangeError("accel_per_unit_amplitude must be positive")

    @property
    def full_scale_accel(self) -> float:
        return self.accel_per_unit_amplitude


def amplitude_for_accel(accel: float, model: LraModel | None = None) -> float:
    """Normalized drive amplitude producing ``accel`` m/s² at resonance.

    Examples:
        >>> amplitude_for_accel(6.2)
        1.0
        >>> amplitude_for_accel(3.1)
        0.5
    """
    lra = model or LraModel()
    if not 0.0 < accel <= lra.full_scale_accel:
        raise RangeError(
            f"acceleration {accel} m/s² outside (0, {lra.full_scale_accel}] for this actuator"
        )
    return min(accel / lra.accel_per_unit_amplitude, 1.0)


def check_nyquist(max_speed_mm_s: float, params: WaveformParams) -> None:
    """Raise NyquistError if ``max_speed / λ`` exceeds half the sample rate."""
    freq = max_speed_mm_s / params.wavelength_mm
    if freq > params.sample_rate / 2.0:
        raise NyquistError(
            f"{max_speed_mm_s:.1f} mm/s at λ={params.wavelength_mm} mm is {freq:.1f} Hz, "
            f"above Nyquist ({params.sample_rate / 2.0:.1f} Hz)"
        )


class WaveformStreamer:
    """Frame-by-frame synthesizer with a persistent phase accumulator.

    Each :meth:`push` consumes exactly one block of speeds and returns one frame; the
    caller owns the clock. Phase is wrapped into [0, 2π) between frames.
    """

    def __init__(self, params: WaveformParams, *, t0: float = 0.0) -> None:
        self.params = params
        self.block_size = params.block_size
        self._phase = float(params.phase)
        self._t0 = t0
        self._frames = 0

    @property
    def phase(self) -> float:
        return self._phase

    @property
    def frames_emitted(self) -> int:
        return self._frames

    def push(self, speeds: FloatArray, *, amplitude: float | None = None) -> DriveFrame:
        """Render one frame.

        Args:
            speeds: Exactly ``block_size`` finger speeds in mm/s.
            amplitude: Override of ``params.amplitude`` for this frame (0 gates it off).

        Raises:
            RangeError: Wrong block length.
            NyquistError: Any speed would alias.
        """
        block = np.asarray(speeds, dtype=np.float64)
        if block.shape != (self.block_size,):
            raise RangeError(f"expected a block of {self.block_size} speeds, got {block.shape}")
        check_nyquist(float(block.max()), self.params)
        step = TWO_PI * block / self.params.wavelength_mm / self.params.sample_rate
        offsets = np.concatenate(([0.0], np.cumsum(step[:-1])))
        amp = self.params.amplitude if amplitude is None else amplitude
        samples = amp * np.sin(self._phase + offsets)
        self._phase = math.fmod(self._phase + float(step.sum()), TWO_PI)
        frame = DriveFrame(
            t0=self._t0 + self._frames / self.params.render_rate,
            samples=samples,
            frame_rate=self.params.render_rate,
        )
        self._frames += 1
        return frame


def _resample(trace: VelocityTrace, rate: int) -> FloatArray:
    if trace.rate == rate:
        return trace.speeds
    n = math.ceil(round(trace.duration * rate, 9))
    src_t = np.arange(len(trace.speeds), dtype=np.float64) / trace.rate
    return np.interp(np.arange(n, dtype=np.float64) / rate, src_t, trace.speeds)


def synthesize(trace: VelocityTrace, params: WaveformParams) -> list[DriveFrame]:
    """Render a whole velocity trace as drive frames.

    The trace is resampled to ``params.sample_rate`` if needed; a trailing partial block is
    padded by holding the last speed. Concatenating the frames gives the same samples as
    streaming them through :class:`WaveformStreamer`.

    Raises:
        RangeError: Empty trace.
        NyquistError: ``max(v) / λ`` exceeds half the sample rate.
    """
    if len(trace) == 0:
        raise RangeError("velocity trace is empty")
    speeds = _resample(trace, params.sample_rate)
    check_nyquist(float(speeds.max()), params)
    block = params.block_size
    remainder = len(speeds) % block
    if remainder:
        speeds = np.concatenate([speeds, np.full(block - remainder, speeds[-1])])
    streamer = WaveformStreamer(params, t0=trace.t0)
    frames = [streamer.push(chunk) for chunk in speeds.reshape(-1, block)]
    _log.debug("synthesized {n} frames", n=len(frames), amplitude=params.amplitude)
    return frames


def synthesize_samples(trace: VelocityTrace, params: WaveformParams) -> FloatArray:
    """Concatenated samples of :func:`synthesize`."""
    return np.concatenate([f.samples for f in synthesize(trace, params)])


def to_pcm16(samples: FloatArray) -> npt.NDArray[np.int16]:
    """Scale [-1, 1] drive values to little-endian signed 16-bit PCM."""
    clipped = np.clip(samples, -1.0, 1.0)
    return np.round(clipped * 32767.0).astype("<i2")


def write_wav(path: str | Path, samples: FloatArray, sample_rate: int) -> Path:
    """Write mono 16-bit PCM WAV."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    wavfile.write(target, sample_rate, to_pcm16(samples))
    _log.info("wrote {path}", path=str(target), samples=len(samples), rate=sample_rate)
    return target
