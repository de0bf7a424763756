"""Tests for speed-driven waveform synthesis."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from scipy.io import wavfile

from hapticsim import (
    LraModel,
    NyquistError,
    RangeError,
    VelocityTrace,
    WaveformParams,
    WaveformStreamer,
    amplitude_for_accel,
    synthesize,
    synthesize_samples,
    to_pcm16,
    write_wav,
)


def _peak_hz(samples: np.ndarray, rate: int) -> float:
    spectrum = np.abs(np.fft.rfft(samples))
    return float(np.fft.rfftfreq(len(samples), 1.0 / rate)[np.argmax(spectrum)])


class TestAmplitude:
    """Test acceleration to drive amplitude mapping."""

    def test_full_scale(self) -> None:
        """Test that the strongest level is full-scale drive."""
        assert amplitude_for_accel(6.2) == 1.0

    def test_linear(self) -> None:
        """Test the linear LRA model."""
        assert amplitude_for_accel(3.7) == pytest.approx(3.7 / 6.2)

    def test_out_of_range(self) -> None:
        """Test that accelerations beyond the actuator are rejected."""
        with pytest.raises(RangeError):
            amplitude_for_accel(7.0)
        with pytest.raises(RangeError):
            amplitude_for_accel(0.0)

    def test_custom_model(self) -> None:
        """Test a stronger actuator."""
        assert amplitude_for_accel(5.0, LraModel(accel_per_unit_amplitude=10.0)) == 0.5


class TestSynthesize:
    """Test whole-trace synthesis."""

    @pytest.mark.parametrize(("speed", "wavelength"), [(100.0, 1.0), (250.0, 1.0), (200.0, 2.0)])
    def test_frequency_follows_speed(self, speed: float, wavelength: float) -> None:
        """Test that the drive frequency is v / lambda."""
        params = WaveformParams(wavelength_mm=wavelength)
        samples = synthesize_samples(VelocityTrace.constant(speed, 1.0), params)
        assert _peak_hz(samples, params.sample_rate) == pytest.approx(speed / wavelength, abs=1.0)

    def test_amplitude(self) -> None:
        """Test the RMS of a full-cycle render."""
        params = WaveformParams(amplitude=0.5)
        samples = synthesize_samples(VelocityTrace.constant(100.0, 1.0), params)
        assert np.sqrt(np.mean(samples**2)) == pytest.approx(0.5 / math.sqrt(2), rel=1e-3)
        assert np.max(np.abs(samples)) <= 0.5 + 1e-12

    def test_zero_speed_is_silent(self) -> None:
        """Test that a resting finger renders nothing."""
        samples = synthesize_samples(VelocityTrace.constant(0.0, 0.1), WaveformParams())
        assert np.all(samples == 0.0)

    def test_frames(self) -> None:
        """Test frame count and timing."""
        frames = synthesize(VelocityTrace.constant(100.0, 0.01), WaveformParams())
        assert len(frames) == 10
        assert all(len(f.samples) == 3 for f in frames)
        assert frames[3].t0 == pytest.approx(0.003)

    def test_partial_block_is_padded(self) -> None:
        """Test that a trailing partial block holds the last speed."""
        trace = VelocityTrace(3000.0, np.full(7, 100.0))
        assert len(synthesize_samples(trace, WaveformParams())) == 9

    def test_resample(self) -> None:
        """Test that a lower-rate trace is resampled to the drive rate."""
        trace = VelocityTrace(1000.0, np.full(1000, 100.0))
        assert len(synthesize_samples(trace, WaveformParams())) == 3000

    def test_nyquist(self) -> None:
        """Test that an aliasing speed is rejected."""
        params = WaveformParams(wavelength_mm=0.2, max_speed_mm_s=100.0)
        with pytest.raises(NyquistError):
            synthesize(VelocityTrace.constant(400.0, 0.1), params)

    def test_empty_trace(self) -> None:
        """Test that an empty trace is rejected."""
        with pytest.raises(RangeError):
            synthesize(VelocityTrace(3000.0, np.array([])), WaveformParams())


class TestStreamer:
    """Test the frame-by-frame streamer."""

    def test_matches_batch(self) -> None:
        """Test that streaming equals whole-trace synthesis."""
        params = WaveformParams(phase=0.3)
        speeds = np.linspace(10.0, 300.0, 3000)
        batch = synthesize_samples(VelocityTrace(3000.0, speeds), params)
        streamer = WaveformStreamer(params)
        streamed = np.concatenate([streamer.push(c).samples for c in speeds.reshape(-1, 3)])
        assert np.array_equal(batch, streamed)

    def test_phase_is_continuous_across_gating(self) -> None:
        """Test that a gated frame still advances the phase."""
        streamer = WaveformStreamer(WaveformParams())
        streamer.push(np.full(3, 100.0))
        silent = streamer.push(np.full(3, 100.0), amplitude=0.0)
        assert np.all(silent.samples == 0.0)
        assert streamer.frames_emitted == 2
        assert streamer.phase == pytest.approx(2 * np.pi * 100.0 * 6 / 3000)

    def test_phase_wraps(self) -> None:
        """Test that the accumulator stays in [0, 2pi)."""
        streamer = WaveformStreamer(WaveformParams())
        for _ in range(500):
            streamer.push(np.full(3, 397.0))
            assert 0.0 <= streamer.phase < 2 * np.pi

    def test_block_length(self) -> None:
        """Test that a wrong block size is rejected."""
        with pytest.raises(RangeError):
            WaveformStreamer(WaveformParams()).push(np.full(4, 100.0))


class TestPcm:
    """Test PCM conversion and WAV output."""

    def test_to_pcm16(self) -> None:
        """Test scaling and clipping."""
        pcm = to_pcm16(np.array([-2.0, -1.0, 0.0, 0.5, 1.0]))
        assert pcm.dtype == np.dtype("<i2")
        assert pcm.tolist() == [-32767, -32767, 0, 16384, 32767]

    def test_write_wav(self, tmp_path: Path) -> None:
        """Test that the WAV file reads back at the drive rate."""
        samples = synthesize_samples(VelocityTrace.constant(100.0, 0.2), WaveformParams())
        path = write_wav(tmp_path / "drive.wav", samples, 3000)
        rate, data = wavfile.read(path)
        assert rate == 3000
        assert len(data) == 600
        assert data.dtype == np.int16
