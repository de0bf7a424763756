"""Throughput of the simulation loops.

Run with:
    uv run python -m pytest benchmarks/bench_throughput.py -v -s

Or directly:
    uv run python benchmarks/bench_throughput.py
"""

from __future__ import annotations

import time

import numpy as np

from hapticsim import (
    WaveformParams,
    WaveformStreamer,
    configure_logging,
    load_scenario,
    run_scenario,
    run_step_response,
)

# Simulated seconds per case
SECONDS = 5.0


def _rate(simulated: float, elapsed: float) -> float:
    return simulated / elapsed if elapsed > 0 else float("inf")


def benchmark_scenario() -> dict[str, float]:
    """Run the bundled pneumatic scenario end to end."""
    config = load_scenario("ceramic-as-glass")
    start = time.perf_counter()
    trace = run_scenario(config)
    elapsed = time.perf_counter() - start
    simulated = len(trace) / 1000.0
    return {"elapsed": elapsed, "rate": _rate(simulated, elapsed)}


def benchmark_step_response() -> dict[str, float]:
    """Simulate one 10 kPa step with its hold and tail."""
    start = time.perf_counter()
    trace, _ = run_step_response(10.0, hold=SECONDS, seed=0)
    elapsed = time.perf_counter() - start
    simulated = float(trace.t[-1])
    return {"elapsed": elapsed, "rate": _rate(simulated, elapsed)}


def benchmark_streamer() -> dict[str, float]:
    """Push one frame per millisecond at a varying speed."""
    params = WaveformParams()
    streamer = WaveformStreamer(params)
    frames = int(SECONDS * params.render_rate)
    speeds = np.linspace(0.0, 300.0, frames * params.block_size).reshape(frames, -1)
    start = time.perf_counter()
    for block in speeds:
        streamer.push(block)
    elapsed = time.perf_counter() - start
    return {"elapsed": elapsed, "rate": _rate(SECONDS, elapsed)}


CASES = {
    "scenario (ceramic-as-glass)": benchmark_scenario,
    "step response (10 kPa)": benchmark_step_response,
    "waveform streamer": benchmark_streamer,
}


def print_results(name: str, results: dict[str, float]) -> None:
    """Print one result row."""
    print(f"{name:<32} {results['elapsed'] * 1000:>10.1f} ms {results['rate']:>10.1f}x")


def main() -> None:
    """Run all benchmarks and print results."""
    configure_logging("ERROR")
    print("\n" + "=" * 60)
    print(" hapticsim throughput")
    print("=" * 60)
    print(f"{'Case':<32} {'Time':>13} {'Realtime':>11}")
    print("-" * 60)
    for name, fn in CASES.items():
        print_results(name, fn())
    print()


# Pytest integration
class TestBenchmark:
    """Benchmark tests for pytest execution."""

    def test_scenario(self) -> None:
        """Benchmark the scenario loop."""
        results = benchmark_scenario()
        print_results("scenario", results)
        assert results["elapsed"] > 0

    def test_step_response(self) -> None:
        """Benchmark the pressure step response."""
        results = benchmark_step_response()
        print_results("step response", results)
        assert results["elapsed"] > 0

    def test_streamer(self) -> None:
        """Benchmark the waveform streamer."""
        results = benchmark_streamer()
        print_results("streamer", results)
        assert results["elapsed"] > 0


if __name__ == "__main__":
    main()
