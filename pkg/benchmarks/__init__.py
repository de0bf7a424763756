"""hapticsim benchmarks."""
