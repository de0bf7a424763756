"""Tests for the pneumatic plant, PID loop and fingertip response."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hapticsim import (
    PidController,
    PidGains,
    PlantParams,
    PlantState,
    RangeError,
    StepMetrics,
    contact_area_reduction,
    equilibrium_pressure,
    pid_tick,
    plant_step,
    pressure_to_lift,
    run_step_response,
)


class TestPlant:
    """Test the first-order tube model."""

    def test_pumping_raises_pressure(self) -> None:
        """Test that positive duty inflates the tube."""
        state = plant_step(PlantState(), 1.0, 0.001, PlantParams())
        assert state.pressure > 0.0
        assert state.t == pytest.approx(0.001)

    def test_pressure_is_clamped(self) -> None:
        """Test the [0, 15] kPa clamp."""
        params = PlantParams()
        assert plant_step(PlantState(), -1.0, 0.01, params).pressure == 0.0
        state = PlantState(pressure=14.99)
        assert plant_step(state, 1.0, 0.01, params).pressure <= 15.0

    def test_duty_is_clamped(self) -> None:
        """Test that out-of-range duty is limited to [-1, 1]."""
        assert plant_step(PlantState(), 3.0, 0.001, PlantParams()).pump_duty == 1.0

    def test_dt_range(self) -> None:
        """Test the integration step bound."""
        with pytest.raises(RangeError):
            plant_step(PlantState(), 0.5, 0.02, PlantParams())

    def test_converges_to_equilibrium(self) -> None:
        """Test that holding a duty settles where inflow equals leak."""
        params = PlantParams()
        state = PlantState()
        for _ in range(20000):
            state = plant_step(state, 0.1, 0.001, params)
        assert state.pressure == pytest.approx(equilibrium_pressure(0.1, params), rel=1e-3)

    def test_closed_tube_holds_pressure(self) -> None:
        """Test that without pumping or leak the pressure does not move."""
        params = PlantParams(leak_coeff=0.0)
        state = PlantState(pressure=10.0)
        for _ in range(100):
            state = plant_step(state, 0.0, 0.001, params)
        assert state.pressure == 10.0

    def test_leak_decays_monotonically(self) -> None:
        """Test that an idle tube with a leak loses pressure on every step."""
        params = PlantParams()
        pressures = [10.0]
        state = PlantState(pressure=10.0)
        for _ in range(2000):
            state = plant_step(state, 0.0, 0.001, params)
            pressures.append(state.pressure)
        assert all(b < a for a, b in zip(pressures, pressures[1:], strict=False))
        assert 0.0 < pressures[-1] < 10.0

    def test_full_duty_exceeds_working_range(self) -> None:
        """Test that the pump can reach the top of the validated range."""
        assert equilibrium_pressure(1.0, PlantParams()) > 12.0

    def test_invalid_state(self) -> None:
        """Test state validation."""
        with pytest.raises(RangeError):
            PlantState(pressure=-1.0)
        with pytest.raises(RangeError):
            PlantParams(tube_volume=0.0)


class TestPid:
    """Test the positional PID update."""

    def test_proportional(self) -> None:
        """Test a pure P controller."""
        duty, _ = pid_tick(10.0, 4.0, PidGains(kp=0.1, ki=0.0))
        assert duty == pytest.approx(0.6)

    def test_integral_accumulates(self) -> None:
        """Test that the integral grows with persistent error."""
        gains = PidGains(kp=0.0, ki=1.0)
        duty, state = pid_tick(1.0, 0.0, gains)
        duty2, _ = pid_tick(1.0, 0.0, gains, state)
        assert duty == pytest.approx(0.05)
        assert duty2 == pytest.approx(0.10)

    def test_output_limits(self) -> None:
        """Test saturation at the output limits."""
        duty, _ = pid_tick(100.0, 0.0, PidGains())
        assert duty == 1.0
        duty, _ = pid_tick(0.0, 100.0, PidGains())
        assert duty == -1.0

    def test_anti_windup(self) -> None:
        """Test that a saturated controller does not wind up its integral."""
        controller = PidController(PidGains(kp=1.0, ki=1.0))
        for _ in range(100):
            controller.tick(50.0, 0.0)
        frozen = controller.state.integral
        assert frozen <= 1.0
        assert controller.tick(0.0, 1.0) < 0.0

    def test_derivative_on_second_tick(self) -> None:
        """Test that the derivative term is zero on the first tick."""
        gains = PidGains(kp=0.0, ki=0.0, kd=0.01)
        first, state = pid_tick(1.0, 0.0, gains)
        second, _ = pid_tick(1.0, 0.5, gains, state)
        assert first == 0.0
        assert second == pytest.approx(0.01 * (0.5 - 1.0) / 0.05)

    def test_reset(self) -> None:
        """Test that reset clears controller memory."""
        controller = PidController(PidGains())
        controller.tick(5.0, 0.0)
        controller.reset()
        assert controller.state.integral == 0.0
        assert controller.state.prev_error is None


class TestStepResponse:
    """Test closed-loop step responses."""

    @pytest.mark.parametrize("target", [2.0, 6.0, 10.0, 12.0])
    def test_tracking_error(self, target: float) -> None:
        """Test stable-stage errors per target."""
        _, metrics = run_step_response(target, seed=3)
        assert metrics.mae_stable <= 0.6
        assert metrics.mme_stable <= 1.3
        assert metrics.mae_stable <= metrics.mme_stable
        assert metrics.mae_prop <= metrics.mme_prop

    def test_sweep_average(self) -> None:
        """Test the average stable MAE over the 1-12 kPa sweep."""
        maes = [run_step_response(float(t), seed=t)[1].mae_stable for t in range(1, 13)]
        assert sum(maes) / len(maes) == pytest.approx(0.386, abs=0.25)

    def test_timing_at_ten_kpa(self) -> None:
        """Test activation and deactivation times at 10 kPa."""
        _, metrics = run_step_response(10.0, seed=0)
        assert 0.10 <= metrics.activation_time <= 0.30
        assert 0.20 <= metrics.deactivation_time <= 0.60

    def test_overshoot(self) -> None:
        """Test that the response does not overshoot by more than 1.5 kPa."""
        trace, _ = run_step_response(10.0, seed=0)
        assert trace.overshoot <= 1.5

    def test_trace_shape(self) -> None:
        """Test the 1 ms record layout."""
        trace, _ = run_step_response(6.0, hold=5.0, seed=1)
        assert trace.band_entry_time is not None
        assert trace.setpoint_off_time == pytest.approx(trace.band_entry_time + 5.0)
        assert len(trace) == len(trace.pressure) == len(trace.measured)
        assert np.all(np.diff(trace.t) > 0)
        assert trace.setpoint[-1] == 0.0

    def test_zero_target(self) -> None:
        """Test that a 0 kPa step is all zeros."""
        trace, metrics = run_step_response(0.0)
        assert np.all(trace.pressure == 0.0)
        assert metrics.mae_stable == 0.0
        assert metrics.activation_time == 0.0

    def test_deterministic(self) -> None:
        """Test that the same seed reproduces the same run."""
        a, ma = run_step_response(8.0, seed=5)
        b, mb = run_step_response(8.0, seed=5)
        assert np.array_equal(a.measured, b.measured)
        assert ma == mb

    def test_noise_free(self) -> None:
        """Test that a noise-free sensor tracks tightly once settled."""
        plant = PlantParams().without_noise()
        _, metrics = run_step_response(10.0, plant=plant)
        assert metrics.mae_stable < 0.2
        assert math.isfinite(metrics.activation_time)

    def test_tube_that_never_vents(self) -> None:
        """Test that a tube which never deflates reports an infinite deactivation time."""
        plant = PlantParams(leak_coeff=0.0, valve_vent_flow=0.0).without_noise()
        _, metrics = run_step_response(6.0, hold=5.0, plant=plant)
        assert math.isfinite(metrics.activation_time)
        assert metrics.deactivation_time == math.inf

    def test_metrics_ordering(self) -> None:
        """Test that a mean error above the maximum error is rejected."""
        with pytest.raises(RangeError):
            StepMetrics(1.0, 0.5, 0.0, 0.0, 0.1, 0.2)
        with pytest.raises(RangeError):
            StepMetrics(0.0, 0.0, 0.3, 0.2, 0.1, 0.2)

    @pytest.mark.parametrize(("target", "hold"), [(-1.0, 6.0), (12.5, 6.0), (6.0, 4.0)])
    def test_invalid(self, target: float, hold: float) -> None:
        """Test target and hold validation."""
        with pytest.raises(RangeError):
            run_step_response(target, hold=hold)


class TestFingertip:
    """Test lift and contact-area lookups."""

    @pytest.mark.parametrize(
        ("pressure", "lift"), [(0.0, 0.0), (6.0, 2.24), (8.0, 3.36), (10.0, 4.07)]
    )
    def test_measured_lift(self, pressure: float, lift: float) -> None:
        """Test the measured lift points."""
        assert pressure_to_lift(pressure) == pytest.approx(lift)

    def test_lift_is_monotonic(self) -> None:
        """Test that lift never decreases with pressure."""
        lifts = [pressure_to_lift(p) for p in np.linspace(0.0, 12.0, 49)]
        assert all(a <= b for a, b in zip(lifts, lifts[1:], strict=False))

    def test_lift_range(self) -> None:
        """Test that pressures beyond 12 kPa are rejected."""
        with pytest.raises(RangeError):
            pressure_to_lift(12.5)

    @pytest.mark.parametrize(
        ("pressure", "force", "fraction"),
        [
            (6.0, 0.75, 0.128),
            (8.0, 0.75, 0.255),
            (10.0, 0.75, 0.396),
            (6.0, 1.0, 0.086),
            (8.0, 1.0, 0.152),
            (10.0, 1.0, 0.288),
            (6.0, 1.5, 0.081),
            (8.0, 1.5, 0.119),
            (10.0, 1.5, 0.208),
            (0.0, 1.0, 0.0),
        ],
    )
    def test_measured_area(self, pressure: float, force: float, fraction: float) -> None:
        """Test the measured area grid."""
        assert contact_area_reduction(pressure, force) == pytest.approx(fraction)

    def test_area_interpolates(self) -> None:
        """Test bilinear interpolation between grid points."""
        assert contact_area_reduction(8.0, 0.875) == pytest.approx(0.2035)
        assert contact_area_reduction(7.0, 1.25) == pytest.approx(0.1095)

    def test_area_monotone_on_dense_grid(self) -> None:
        """Test the area trend over a 50 x 50 grid of pressure and force."""
        pressures = np.linspace(0.0, 12.0, 50)
        forces = np.linspace(0.3, 1.5, 50)
        grid = np.array([[contact_area_reduction(p, f) for f in forces] for p in pressures])
        assert np.all(np.diff(grid, axis=0) >= -1e-12)
        assert np.all(np.diff(grid, axis=1) <= 1e-12)

    @given(
        st.floats(min_value=0.0, max_value=12.0),
        st.floats(min_value=0.0, max_value=12.0),
        st.floats(min_value=0.3, max_value=1.5),
    )
    def test_area_grows_with_pressure(self, p1: float, p2: float, force: float) -> None:
        """Test that more pressure never shrinks the area reduction."""
        lo, hi = sorted((p1, p2))
        assert contact_area_reduction(lo, force) <= contact_area_reduction(hi, force) + 1e-12

    @given(
        st.floats(min_value=0.0, max_value=12.0),
        st.floats(min_value=0.3, max_value=1.5),
        st.floats(min_value=0.3, max_value=1.5),
    )
    def test_area_shrinks_with_force(self, pressure: float, f1: float, f2: float) -> None:
        """Test that pressing harder never increases the area reduction."""
        lo, hi = sorted((f1, f2))
        assert contact_area_reduction(pressure, lo) >= contact_area_reduction(pressure, hi) - 1e-12

    def test_force_is_clamped_to_grid(self) -> None:
        """Test that forces below the grid use its edge."""
        assert contact_area_reduction(10.0, 0.5) == pytest.approx(0.396)

    def test_force_range(self) -> None:
        """Test that forces outside [0.3, 1.5] N are rejected."""
        with pytest.raises(RangeError):
            contact_area_reduction(10.0, 2.0)
