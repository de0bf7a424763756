"""Command line entry point: ``hapticsim <command> [options]``.

Every command writes its files under ``--out`` together with a ``manifest.json`` that
records the command line, seed, config hash, package version and the files written.
Failures print one JSON object to stderr and exit non-zero (usage 2, range 3, config 4,
any other library error 1).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from ._calibrate import CalibrationGrid, calibrate, calibration_document
from ._config import config_hash, controller_document, load_controller_config
from ._config import write_document as write_json
from ._errors import (
    ConfigError,
    HapticSimError,
    RangeError,
    SubstitutionError,
    UnknownEntryError,
    UnknownLabelError,
    UnknownMaterialError,
)
from ._log import configure_logging, flush_logging, get_logger
from ._parse import (
    METRICS_HEADER,
    read_speed_csv,
    write_metrics_csv,
    write_rows,
    write_step_trace_csv,
)
from ._perception import OverlapMetric, overlap, rank_stimuli, recommend_stimulus
from ._pipeline import ScenarioConfig, load_scenario, run_batch, write_trace_csv
from ._plot import plot_session, plot_step_response
from ._pneumo import (
    REFERENCE_ACTIVATION_S,
    REFERENCE_AVERAGES,
    REFERENCE_DEACTIVATION_S,
    REFERENCE_STEP_METRICS,
    StepMetrics,
    StepTrace,
    run_step_response,
)
from ._protocol import encode_event
from ._scheduler import SchedulerConfig
from ._tracking import VelocityTrace
from ._trials import generate_trials, write_trials_csv
from ._types import (
    MAX_PNEUMO_PRESSURE,
    Material,
    Stimulus,
    WaveformParams,
    material_from_name,
    stimulus_from_label,
)
from ._vibro import amplitude_for_accel, synthesize_samples, write_wav
from .contrib.bridge import replay, serve
from .contrib.decorators import timed
from .contrib.events import add_manifest_fields, record_output, run_manifest

MANIFEST_NAME = "manifest.json"
DEFAULT_TARGETS_KPA = tuple(float(t) for t in range(1, 13))

EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_RANGE = 3
EXIT_CONFIG = 4

_log = get_logger("cli")


class UsageError(HapticSimError):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> Any:  # type: ignore[override]
        raise UsageError(message)


def exit_code_for(exc: BaseException) -> int:
    """Exit code of a failed command."""
    usage = (UsageError, SubstitutionError, UnknownLabelError, UnknownMaterialError)
    if isinstance(exc, (*usage, UnknownEntryError)):
        return EXIT_USAGE
    if isinstance(exc, RangeError):
        return EXIT_RANGE
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    return EXIT_ERROR


@dataclass(frozen=True, slots=True)
class CommandContext:
    """Resolved global options handed to every command."""

    out: Path
    seed: int | None
    config: str | None

    def output(self, name: str) -> Path:
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def wrote(self, path: Path) -> Path:
        record_output(path, root=self.out)
        return path


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        message = f"expected comma-separated numbers, got {text!r}"
        raise argparse.ArgumentTypeError(message) from None


def _material_arg(text: str) -> Material:
    try:
        return material_from_name(text)
    except UnknownMaterialError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _cell_arg(text: str) -> tuple[Material, Stimulus]:
    material, sep, label = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected MATERIAL:LABEL, got {text!r}")
    try:
        return material_from_name(material), stimulus_from_label(label)
    except (UnknownMaterialError, UnknownLabelError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _mapping_args(items: Sequence[str]) -> dict[Material, Stimulus]:
    mapping: dict[Material, Stimulus] = {}
    for item in items:
        material, sep, label = item.partition("=")
        if not sep:
            raise UsageError(f"--map expects MATERIAL=LABEL, got {item!r}")
        mapping[material_from_name(material)] = stimulus_from_label(label)
    if not mapping:
        raise UsageError("at least one --map MATERIAL=LABEL is required")
    return mapping


# step-sweep


def cmd_step_sweep(args: argparse.Namespace, ctx: CommandContext) -> int:
    targets: list[float] = args.targets_kpa
    if not targets:
        raise UsageError("--targets-kpa needs at least one value")
    for target in targets:
        if not 0.0 <= target <= MAX_PNEUMO_PRESSURE:
            raise RangeError(f"target {target} kPa outside [0, {MAX_PNEUMO_PRESSURE}]")
    seed = ctx.seed or 0
    plant, gains = load_controller_config(ctx.config)
    add_manifest_fields(config_hash=config_hash(controller_document(plant, gains)))

    def run(item: tuple[int, float]) -> tuple[StepTrace, StepMetrics]:
        index, target = item
        return run_step_response(
            target, hold=args.hold_s, gains=gains, plant=plant, seed=seed + index
        )

    with ThreadPoolExecutor(max_workers=max(args.workers, 1)) as pool:
        results = list(pool.map(run, enumerate(targets)))

    rows = [(target, metrics) for target, (_, metrics) in zip(targets, results, strict=True)]
    ctx.wrote(write_metrics_csv(ctx.output("step_metrics.csv"), rows))
    ctx.wrote(
        write_rows(
            ctx.output("step_reference.csv"),
            (*METRICS_HEADER, "source"),
            [
                (f"{t:.1f}", *(f"{v:.3f}" for v in values), "reference")
                for t, values in sorted(REFERENCE_STEP_METRICS.items())
            ]
            + [("average", *(f"{v:.3f}" for v in REFERENCE_AVERAGES), "reference")],
        )
    )
    for target, (trace, _) in zip(targets, results, strict=True):
        stem = f"steps/step_{target:04.1f}kPa"
        ctx.wrote(write_step_trace_csv(ctx.output(f"{stem}.csv"), trace))
        if not args.no_plots:
            ctx.wrote(plot_step_response(trace, ctx.output(f"{stem}.svg")))

    averages = np.mean(
        [[m.mae_prop, m.mme_prop, m.mae_stable, m.mme_stable] for _, m in rows], axis=0
    )
    print(f"{'':>10} {'mae_prop':>9} {'mme_prop':>9} {'mae_stab':>9} {'mme_stab':>9}")
    for target, m in rows:
        print(
            f"{target:>8.1f}kPa {m.mae_prop:9.3f} {m.mme_prop:9.3f} "
            f"{m.mae_stable:9.3f} {m.mme_stable:9.3f}"
        )
    print(f"{'average':>10} " + " ".join(f"{v:9.3f}" for v in averages))
    print(f"{'reference':>10} " + " ".join(f"{v:9.3f}" for v in REFERENCE_AVERAGES))
    for target, (_, m) in zip(targets, results, strict=True):
        if target == 10.0:
            print(
                f"10 kPa activation {m.activation_time * 1e3:.1f} ms "
                f"(reference {REFERENCE_ACTIVATION_S * 1e3:.2f}), deactivation "
                f"{m.deactivation_time * 1e3:.1f} ms "
                f"(reference {REFERENCE_DEACTIVATION_S * 1e3:.2f})"
            )
    return 0


# synth


def cmd_synth(args: argparse.Namespace, ctx: CommandContext) -> int:
    if args.trace is not None:
        trace = read_speed_csv(args.trace)
    elif args.speed_mm_s is not None:
        trace = VelocityTrace.constant(args.speed_mm_s, args.duration_s, rate=args.sample_rate)
    else:
        raise UsageError("synth needs --trace or --speed-mm-s")
    level = stimulus_from_label(args.level)
    if not level.is_vibro:
        raise UsageError(f"--level must be a vibrotactile level (A1-A3), got {level.label}")
    assert level.vibro_accel is not None
    params = WaveformParams(
        amplitude=amplitude_for_accel(level.vibro_accel),
        wavelength_mm=args.lambda_mm,
        sample_rate=args.sample_rate,
        max_speed_mm_s=max(float(trace.speeds.max()), 1.0),
    )
    samples = synthesize_samples(trace, params)
    path = ctx.wrote(write_wav(ctx.output(args.name), samples, params.sample_rate))
    print(f"wrote {len(samples)} samples at {params.sample_rate} Hz to {path}")
    return 0


# trials


def cmd_trials(args: argparse.Namespace, ctx: CommandContext) -> int:
    plan = generate_trials(ctx.seed or 0, args.participant)
    path = ctx.wrote(write_trials_csv(ctx.output(f"trials_p{args.participant:02d}.csv"), plan))
    order = ", ".join(m.value for m in plan.material_order)
    print(f"{len(plan)} trials, material order {order} -> {path}")
    return 0


# recommend / overlap


def cmd_recommend(args: argparse.Namespace, ctx: CommandContext) -> int:
    metric: OverlapMetric = args.metric
    best, _ = recommend_stimulus(
        args.physical,
        args.virtual,
        metric=metric,
        gate_direction=not args.no_direction_gate,
        tie_tolerance=args.tie_tolerance,
    )
    ranking = rank_stimuli(
        args.physical,
        args.virtual,
        metric=metric,
        gate_direction=not args.no_direction_gate,
        tie_tolerance=args.tie_tolerance,
    )
    name = f"recommend_{args.physical.value}_as_{args.virtual.value}.csv"
    ctx.wrote(
        write_rows(
            ctx.output(name),
            ("rank", "stimulus", "score", "direction_ok"),
            (
                (i + 1, r.stimulus.label, f"{r.score:.6f}", str(r.direction_ok).lower())
                for i, r in enumerate(ranking)
            ),
        )
    )
    print(f"{args.physical.value} rendered as {args.virtual.value} ({metric}):")
    for i, r in enumerate(ranking, start=1):
        mark = "" if r.direction_ok else "  (opposite direction)"
        print(f"{i}. {r.stimulus.label:<3} {r.score:.4f}{mark}")
    print(f"recommended: {best.label}")
    return 0


def cmd_overlap(args: argparse.Namespace, ctx: CommandContext) -> int:
    value = overlap(args.a, args.b, metric=args.metric)
    print(
        json.dumps(
            {
                "a": f"{args.a[0].value}:{args.a[1].label}",
                "b": f"{args.b[0].value}:{args.b[1].label}",
                "metric": args.metric,
                "overlap": round(value, 6),
            }
        )
    )
    return 0


# scenario


def _scenario_configs(args: argparse.Namespace) -> list[ScenarioConfig]:
    refs: list[str] = list(args.names)
    if args.scenario_path is not None:
        refs.append(args.scenario_path)
    if not refs:
        raise UsageError("scenario needs a bundled name or --config PATH")
    return [load_scenario(ref) for ref in refs]


def cmd_scenario(args: argparse.Namespace, ctx: CommandContext) -> int:
    configs = _scenario_configs(args)
    if ctx.seed is not None:
        configs = [ScenarioConfig.from_mapping({**c.document, "seed": ctx.seed}) for c in configs]
    add_manifest_fields(
        config_hash=config_hash({c.name: dict(c.document) for c in configs}),
        scenarios=[c.name for c in configs],
    )
    traces = run_batch(configs, max_workers=args.workers)
    for trace in traces:
        ctx.wrote(write_trace_csv(ctx.output(f"{trace.name}_trace.csv"), trace))
        ctx.wrote(write_json(dict(trace.summary), ctx.output(f"{trace.name}_summary.json")))
        if not args.no_plots:
            ctx.wrote(plot_session(trace, ctx.output(f"{trace.name}.svg")))
        s = trace.summary
        print(
            f"{trace.name}: {s['duration_ms']} ms, commands {s['commands']}, "
            f"peak {s['peak_pressure_kpa']} kPa, lift {s['max_lift_mm']} mm"
        )
    return 0


# calibrate


def cmd_calibrate(args: argparse.Namespace, ctx: CommandContext) -> int:
    defaults = CalibrationGrid()
    plant, gains = load_controller_config(ctx.config)
    try:
        grid = CalibrationGrid(
            pump_max_flow=tuple(args.flow or defaults.pump_max_flow),
            leak_coeff=tuple(args.leak or defaults.leak_coeff),
            kp=tuple(args.kp or defaults.kp),
            ki=tuple(args.ki or defaults.ki),
        )
        best = calibrate(grid, base_plant=plant, base_gains=gains, seed=ctx.seed or 0)
    except ValueError as exc:
        raise RangeError(str(exc)) from exc
    document = calibration_document(best, grid)
    add_manifest_fields(config_hash=config_hash(document), candidates=len(grid))
    path = ctx.wrote(write_json(document, ctx.output("pneumo_calibrated.json")))
    print(
        f"best of {len(grid)}: mae_stable {best.mae_stable:.3f} kPa, "
        f"activation {best.activation_time * 1e3:.1f} ms, "
        f"deactivation {best.deactivation_time * 1e3:.1f} ms -> {path}"
    )
    return 0


# bridge / replay


def cmd_bridge(args: argparse.Namespace, ctx: CommandContext) -> int:
    mapping = _mapping_args(args.map)
    config = SchedulerConfig.for_mode(args.mode)

    async def run() -> None:
        server = await serve(mapping, config, host=args.host, port=args.port)
        address = server.sockets[0].getsockname()
        print(f"listening on {address[0]}:{address[1]}", flush=True)
        async with server:
            await server.serve_forever()

    try:
        asyncio.run(run())
    except KeyboardInterrupt:
        _log.info("bridge stopped")
    return 0


def cmd_replay(args: argparse.Namespace, ctx: CommandContext) -> int:
    mapping = _mapping_args(args.map)
    out = replay(args.events, mapping, SchedulerConfig.for_mode(args.mode))
    path = ctx.output("replay.ndjson")
    path.write_bytes(b"".join(encode_event(e) + b"\n" for e in out))
    ctx.wrote(path)
    errors = sum(1 for e in out if e.reason is not None)
    print(f"{len(out)} messages ({errors} errors) -> {path}")
    return 0


Handler = Callable[[argparse.Namespace, CommandContext], int]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hapticsim",
        description="Simulated vibrotactile and pneumatic roughness rendering.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    parser.add_argument("--config", default=None, help="controller config file or name")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--log-level", default="WARNING", help="stderr log level")
    parser.add_argument("--log-file", type=Path, default=None, help="JSON log file (DEBUG)")
    parser.add_argument("--log-json", action="store_true", help="JSON logs on stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("step-sweep", help="pressure step responses and MAE/MME table")
    p.add_argument("--targets-kpa", type=_float_list, default=list(DEFAULT_TARGETS_KPA))
    p.add_argument("--hold-s", type=float, default=6.0, help="hold after band entry, s")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(handler=cmd_step_sweep)

    p = sub.add_parser("synth", help="render a speed trace to a drive WAV")
    p.add_argument("--trace", type=Path, default=None, help="t_s,speed_mm_s CSV")
    p.add_argument("--speed-mm-s", type=float, default=None, help="constant speed")
    p.add_argument("--duration-s", type=float, default=1.0)
    p.add_argument("--level", default="A3", help="vibrotactile level A1, A2 or A3")
    p.add_argument("--lambda-mm", type=float, default=1.0, help="virtual wavelength")
    p.add_argument("--sample-rate", type=int, default=3000, help="samples per second")
    p.add_argument("--name", default="drive.wav", help="output file name")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("trials", help="counterbalanced trial plan")
    p.add_argument("--participant", type=int, required=True)
    p.set_defaults(handler=cmd_trials)

    p = sub.add_parser("recommend", help="rank stimuli for a material substitution")
    p.add_argument("physical", type=_material_arg)
    p.add_argument("virtual", type=_material_arg)
    p.add_argument("--metric", choices=("ovl", "bhattacharyya"), default="ovl")
    p.add_argument("--no-direction-gate", action="store_true")
    p.add_argument("--tie-tolerance", type=float, default=0.0)
    p.set_defaults(handler=cmd_recommend)

    p = sub.add_parser("overlap", help="overlap of two rating distributions")
    p.add_argument("a", type=_cell_arg, help="MATERIAL:LABEL")
    p.add_argument("b", type=_cell_arg, help="MATERIAL:LABEL")
    p.add_argument("--metric", choices=("ovl", "bhattacharyya"), default="ovl")
    p.set_defaults(handler=cmd_overlap)

    p = sub.add_parser("scenario", help="run end-to-end scenarios")
    p.add_argument("names", nargs="*", help="bundled scenario names or paths")
    p.add_argument("--config", dest="scenario_path", default=None, help="scenario JSON file")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(handler=cmd_scenario)

    p = sub.add_parser("calibrate", help="grid-search plant and gains")
    p.add_argument("--flow", type=_float_list, default=None, help="pump max flow values")
    p.add_argument("--leak", type=_float_list, default=None, help="leak coefficient values")
    p.add_argument("--kp", type=_float_list, default=None)
    p.add_argument("--ki", type=_float_list, default=None)
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("bridge", help="serve the session protocol on a TCP socket")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--map", action="append", default=[], metavar="MATERIAL=LABEL")
    p.add_argument("--mode", choices=("experiment", "bridge"), default="bridge")
    p.set_defaults(handler=cmd_bridge)

    p = sub.add_parser("replay", help="run an NDJSON event log through the scheduler")
    p.add_argument("--events", type=Path, required=True)
    p.add_argument("--map", action="append", default=[], metavar="MATERIAL=LABEL")
    p.add_argument("--mode", choices=("experiment", "bridge"), default="bridge")
    p.set_defaults(handler=cmd_replay)
    return parser


def _report(exc: BaseException) -> int:
    code = exit_code_for(exc)
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code."""
    args_list = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(args_list)
    except UsageError as exc:
        return _report(exc)

    configure_logging(args.log_level, log_file=args.log_file, serialize=args.log_json)
    ctx = CommandContext(out=args.out, seed=args.seed, config=args.config)
    handler: Handler = args.handler
    fields = {
        "argv": args_list,
        "command": args.command,
        "seed": args.seed,
        "config_hash": None,
        "version": __version__,
    }
    try:
        with run_manifest(fields) as manifest:
            code = timed(name=f"hapticsim {args.command}", level="INFO")(handler)(args, ctx)
            write_json(manifest, ctx.output(MANIFEST_NAME))
    except (HapticSimError, OSError) as exc:
        _log.debug("command failed", error=type(exc).__name__)
        code = _report(exc)
    finally:
        flush_logging()
    return code


if __name__ == "__main__":
    sys.exit(main())
