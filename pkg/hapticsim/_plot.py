"""Self-contained SVG plots of step responses and scenario traces.

Plots use the non-interactive Agg backend and fixed SVG ids and metadata, so the same
data always produces the same file bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from ._log import get_logger  # noqa: E402

if TYPE_CHECKING:
    from matplotlib.figure import Figure

    from ._pipeline import SessionTrace
    from ._pneumo import StepTrace

_log = get_logger("plot")

_RC = {"svg.hashsalt": "hapticsim", "svg.fonttype": "none", "path.simplify": False}


def _save(fig: Figure, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    _log.debug("wrote plot {path}", path=str(target))
    return target


def plot_step_response(trace: StepTrace, path: str | Path) -> Path:
    """Setpoint, sensor reading and true pressure against time."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(8, 4))
        ax.plot(trace.t, trace.setpoint, label="setpoint", color="black", linewidth=1.0)
        ax.step(trace.t, trace.measured, where="post", label="sensor", color="tab:blue")
        ax.plot(trace.t, trace.pressure, label="tube pressure", color="tab:orange")
        if trace.band_entry_time is not None:
            ax.axvline(trace.band_entry_time, color="grey", linestyle=":", linewidth=0.8)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("pressure (kPa)")
        ax.set_title(f"step to {trace.target:g} kPa")
        ax.legend(loc="upper right")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        return _save(fig, path)


def plot_session(trace: SessionTrace, path: str | Path) -> Path:
    """Speed, drive RMS and pressure of a scenario run on a shared time axis."""
    with plt.rc_context(_RC):
        fig, (ax_speed, ax_drive, ax_p) = plt.subplots(3, 1, figsize=(8, 6), sharex=True)
        t = trace.t_ms / 1000.0
        ax_speed.plot(t, trace.speed, color="tab:green")
        ax_speed.set_ylabel("speed (mm/s)")
        ax_drive.plot(t, trace.drive_rms, color="tab:purple")
        ax_drive.set_ylabel("drive RMS")
        ax_p.plot(t, trace.pressure, color="tab:orange")
        ax_p.set_ylabel("pressure (kPa)")
        ax_p.set_xlabel("time (s)")
        ax_speed.set_title(trace.name)
        for ax in (ax_speed, ax_drive, ax_p):
            ax.grid(True, alpha=0.3)
        fig.tight_layout()
        return _save(fig, path)
