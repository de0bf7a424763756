"""hapticsim test suite."""
