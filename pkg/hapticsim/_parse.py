"""CSV readers and writers for traces, tables and metrics.

All files are UTF-8, comma-separated, '.' decimal, with a fixed header line.
Floats are written with fixed precision so repeated runs produce identical bytes.
"""

from __future__ import annotations

import csv
from collections.abc import Iterable, Iterator, Sequence
from pathlib import Path
from typing import IO, Any

import numpy as np

from ._errors import ConfigError
from ._pneumo import StepMetrics, StepTrace
from ._tracking import LandmarkSample, Trajectory, VelocityTrace

TRAJECTORY_HEADER = ("t_s", "x_mm", "y_mm")
SPEED_HEADER = ("t_s", "speed_mm_s")
STEP_TRACE_HEADER = ("t_s", "setpoint_kpa", "measured_kpa", "duty")
METRICS_HEADER = ("target_kpa", "mae_prop", "mme_prop", "mae_stable", "mme_stable")


def read_rows(
    source: str | Path | IO[str],
    columns: Sequence[str],
    *,
    cast: dict[str, type] | None = None,
) -> Iterator[dict[str, Any]]:
    """Yield rows of a CSV file as dicts after checking the header.

    Args:
        source: Path or an open text stream.
        columns: Exact expected header.
        cast: Optional converters per column (e.g. ``{"mean": float}``).

    Raises:
        ConfigError: Header mismatch or a value that fails to convert; the error path is
            ``<file>:<line>.<column>``.

    Examples:
        >>> for row in read_rows("ratings.csv", ("material", "stimulus", "mean", "sd"),
        ...                      cast={"mean": float, "sd": float}):
        ...     print(row["material"], row["mean"])
    """
    cast = cast or {}
    if isinstance(source, (str, Path)):
        with Path(source).open("r", encoding="utf-8", newline="") as fh:
            yield from _iter_rows(fh, str(source), columns, cast)
    else:
        yield from _iter_rows(source, getattr(source, "name", "<stream>"), columns, cast)


def _iter_rows(
    fh: IO[str],
    name: str,
    columns: Sequence[str],
    cast: dict[str, type],
) -> Iterator[dict[str, Any]]:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != tuple(columns):
        raise ConfigError(f"{name}:1", f"expected header {','.join(columns)}")
    for line_no, raw in enumerate(reader, start=2):
        if not raw or all(not cell.strip() for cell in raw):
            continue
        if len(raw) != len(columns):
            raise ConfigError(f"{name}:{line_no}", f"expected {len(columns)} fields")
        record: dict[str, Any] = dict(zip(columns, (cell.strip() for cell in raw), strict=True))
        for key, type_func in cast.items():
            try:
                record[key] = type_func(record[key])
            except (ValueError, TypeError) as exc:
                path = f"{name}:{line_no}.{key}"
                raise ConfigError(path, f"invalid value {record[key]!r}") from exc
        yield record


def write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV file with ``\\n`` line endings."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return target


def _f(value: float, digits: int = 6) -> str:
    return f"{value:.{digits}f}"


def read_trajectory_csv(path: str | Path) -> list[LandmarkSample]:
    """Read ``t_s,x_mm,y_mm`` landmark samples."""
    rows = read_rows(path, TRAJECTORY_HEADER, cast=dict.fromkeys(TRAJECTORY_HEADER, float))
    return [LandmarkSample(r["t_s"], r["x_mm"], r["y_mm"]) for r in rows]


def write_trajectory_csv(path: str | Path, samples: Trajectory | Sequence[LandmarkSample]) -> Path:
    return write_rows(
        path,
        TRAJECTORY_HEADER,
        ((_f(s.t), _f(s.x), _f(s.y)) for s in samples),
    )


def read_speed_csv(path: str | Path) -> VelocityTrace:
    """Read a ``t_s,speed_mm_s`` trace; the rate comes from the mean timestamp spacing."""
    rows = list(read_rows(path, SPEED_HEADER, cast=dict.fromkeys(SPEED_HEADER, float)))
    if len(rows) < 2:
        raise ConfigError(str(path), "a speed trace needs at least two rows")
    t = np.array([r["t_s"] for r in rows])
    speeds = np.array([r["speed_mm_s"] for r in rows])
    if not np.all(np.diff(t) > 0):
        raise ConfigError(str(path), "timestamps must be strictly increasing")
    spacing = float(t[-1] - t[0]) / (len(t) - 1)
    return VelocityTrace(rate=round(1.0 / spacing, 6), speeds=speeds, t0=float(t[0]))


def write_speed_csv(path: str | Path, trace: VelocityTrace) -> Path:
    return write_rows(
        path,
        SPEED_HEADER,
        ((_f(t), _f(v, 4)) for t, v in zip(trace.times, trace.speeds, strict=True)),
    )


def write_step_trace_csv(path: str | Path, trace: StepTrace) -> Path:
    return write_rows(
        path,
        STEP_TRACE_HEADER,
        (
            (_f(t, 3), _f(sp, 3), _f(m, 3), _f(d, 6))
            for t, sp, m, d in zip(trace.t, trace.setpoint, trace.measured, trace.duty, strict=True)
        ),
    )


def write_metrics_csv(path: str | Path, rows: Iterable[tuple[float, StepMetrics]]) -> Path:
    """Write the step-sweep table, one row per target."""
    return write_rows(
        path,
        METRICS_HEADER,
        (
            (
                _f(target, 1),
                _f(m.mae_prop, 4),
                _f(m.mme_prop, 4),
                _f(m.mae_stable, 4),
                _f(m.mme_stable, 4),
            )
            for target, m in rows
        ),
    )
