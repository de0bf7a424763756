"""hapticsim - simulated vibrotactile and pneumatic roughness rendering.

Version: 0.1.0

Usage:
    >>> from hapticsim import VelocityTrace, WaveformParams, synthesize_samples
    >>> drive = synthesize_samples(VelocityTrace.constant(250.0, 1.0), WaveformParams())

    >>> # Pressure step response against the calibrated tube model
    >>> from hapticsim import run_step_response
    >>> trace, metrics = run_step_response(10.0, seed=1)
    >>> metrics.mae_stable

    >>> # Which stimulus makes glass feel like ceramics?
    >>> from hapticsim import Material, recommend_stimulus
    >>> recommend_stimulus(Material.GLASS, Material.CERAMICS)

    >>> # End-to-end scenario on a 1 kHz clock
    >>> from hapticsim import load_scenario, run_scenario, write_trace_csv
    >>> write_trace_csv("trace.csv", run_scenario(load_scenario("ceramic-as-glass")))

Helpers (hapticsim.contrib):
    >>> from hapticsim.contrib import timed, replay, serve
"""

from __future__ import annotations

from ._calibrate import CalibrationGrid, Candidate, calibrate, calibration_document
from ._config import (
    CONFIG_ENV_VAR,
    SCHEMA_VERSION,
    config_hash,
    load_controller_config,
    load_document,
    resolve_config,
)
from ._errors import (
    ConfigError,
    HapticSimError,
    NyquistError,
    ProtocolError,
    RangeError,
    SubstitutionError,
    TooFewSamplesError,
    UnknownEntryError,
    UnknownLabelError,
    UnknownMaterialError,
)
from ._log import configure_logging, flush_logging, get_logger
from ._parse import (
    read_speed_csv,
    read_trajectory_csv,
    write_metrics_csv,
    write_speed_csv,
    write_step_trace_csv,
    write_trajectory_csv,
)
from ._perception import (
    RankedStimulus,
    RatingTable,
    load_rating_table,
    overlap,
    predicted_rating,
    rank_stimuli,
    recommend_stimulus,
)
from ._pipeline import (
    LatencyBudget,
    ScenarioConfig,
    SessionTrace,
    load_scenario,
    run_batch,
    run_scenario,
    write_trace_csv,
)
from ._plot import plot_session, plot_step_response
from ._pneumo import (
    PidController,
    PlantParams,
    PlantState,
    StepMetrics,
    StepTrace,
    contact_area_reduction,
    equilibrium_pressure,
    pid_tick,
    plant_step,
    pressure_to_lift,
    run_step_response,
)
from ._protocol import EventKind, SessionEvent, decode_event, decode_stream, encode_event
from ._scheduler import SchedulerConfig, StimulusScheduler, schedule
from ._tracking import (
    ConstantSpeed,
    LandmarkSample,
    SinusoidalSweep,
    SmoothingConfig,
    Trajectory,
    VelocityTrace,
    Waypoints,
    estimate_velocity,
    synth_trajectory,
)
from ._trials import Trial, TrialPlan, generate_trials, write_trials_csv
from ._types import (
    ALL_STIMULI,
    STIMULUS_LABELS,
    TEST_MATERIALS,
    Material,
    MaterialRole,
    PidGains,
    Stimulus,
    StimulusKind,
    WaveformParams,
    material_from_name,
    stimulus_from_label,
)
from ._vibro import (
    DriveFrame,
    LraModel,
    WaveformStreamer,
    amplitude_for_accel,
    synthesize,
    synthesize_samples,
    to_pcm16,
    write_wav,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_STIMULI",
    "CONFIG_ENV_VAR",
    "SCHEMA_VERSION",
    "STIMULUS_LABELS",
    "TEST_MATERIALS",
    "CalibrationGrid",
    "Candidate",
    "ConfigError",
    "ConstantSpeed",
    "DriveFrame",
    "EventKind",
    "HapticSimError",
    "LandmarkSample",
    "LatencyBudget",
    "LraModel",
    "Material",
    "MaterialRole",
    "NyquistError",
    "PidController",
    "PidGains",
    "PlantParams",
    "PlantState",
    "ProtocolError",
    "RangeError",
    "RankedStimulus",
    "RatingTable",
    "ScenarioConfig",
    "SchedulerConfig",
    "SessionEvent",
    "SessionTrace",
    "SinusoidalSweep",
    "SmoothingConfig",
    "StepMetrics",
    "StepTrace",
    "Stimulus",
    "StimulusKind",
    "StimulusScheduler",
    "SubstitutionError",
    "TooFewSamplesError",
    "Trajectory",
    "Trial",
    "TrialPlan",
    "UnknownEntryError",
    "UnknownLabelError",
    "UnknownMaterialError",
    "VelocityTrace",
    "WaveformParams",
    "WaveformStreamer",
    "Waypoints",
    "__version__",
    "amplitude_for_accel",
    "calibrate",
    "calibration_document",
    "config_hash",
    "configure_logging",
    "contact_area_reduction",
    "decode_event",
    "decode_stream",
    "encode_event",
    "equilibrium_pressure",
    "estimate_velocity",
    "flush_logging",
    "generate_trials",
    "get_logger",
    "load_controller_config",
    "load_document",
    "load_rating_table",
    "load_scenario",
    "material_from_name",
    "overlap",
    "pid_tick",
    "plant_step",
    "plot_session",
    "plot_step_response",
    "predicted_rating",
    "pressure_to_lift",
    "rank_stimuli",
    "read_speed_csv",
    "read_trajectory_csv",
    "recommend_stimulus",
    "resolve_config",
    "run_batch",
    "run_scenario",
    "run_step_response",
    "schedule",
    "stimulus_from_label",
    "synth_trajectory",
    "synthesize",
    "synthesize_samples",
    "to_pcm16",
    "write_metrics_csv",
    "write_speed_csv",
    "write_step_trace_csv",
    "write_trajectory_csv",
    "write_trials_csv",
    "write_wav",
]
