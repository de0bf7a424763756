"""Tests for the command line interface."""

from __future__ import annotations

import csv
import json
import wave
from collections.abc import Generator
from pathlib import Path

import pytest

from hapticsim import __version__, configure_logging
from hapticsim._errors import ConfigError, RangeError, SubstitutionError
from hapticsim.cli import (
    EXIT_CONFIG,
    EXIT_RANGE,
    EXIT_USAGE,
    UsageError,
    exit_code_for,
    main,
)


@pytest.fixture(autouse=True)
def restore_logging() -> Generator[None, None, None]:
    yield
    configure_logging("ERROR")


def run(out_dir: Path, *args: str) -> int:
    return main(["--out", str(out_dir), "--log-level", "ERROR", *args])


def error_payload(capsys: pytest.CaptureFixture[str]) -> dict[str, object]:
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


def manifest(out_dir: Path) -> dict[str, object]:
    return json.loads((out_dir / "manifest.json").read_text())


class TestExitCodes:
    """Test the error to exit code mapping."""

    @pytest.mark.parametrize(
        ("exc", "code"),
        [
            (UsageError("x"), EXIT_USAGE),
            (SubstitutionError("x"), EXIT_USAGE),
            (RangeError("x"), EXIT_RANGE),
            (ConfigError("a", "b"), EXIT_CONFIG),
            (OSError("disk"), 1),
        ],
    )
    def test_mapping(self, exc: BaseException, code: int) -> None:
        """Test each error family."""
        assert exit_code_for(exc) == code

    def test_missing_command(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that a bare invocation is a usage error reported as JSON."""
        assert main([]) == EXIT_USAGE
        payload = error_payload(capsys)
        assert payload["error"] == "UsageError"
        assert payload["exit_code"] == EXIT_USAGE

    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test --version."""
        with pytest.raises(SystemExit):
            main(["--version"])
        assert __version__ in capsys.readouterr().out


class TestTrials:
    """Test the trials command."""

    def test_writes_plan_and_manifest(self, out_dir: Path) -> None:
        """Test the plan file and the run manifest."""
        assert run(out_dir, "--seed", "4", "trials", "--participant", "3") == 0
        with (out_dir / "trials_p03.csv").open(newline="") as fh:
            assert len(list(csv.reader(fh))) == 211
        doc = manifest(out_dir)
        assert doc["command"] == "trials"
        assert doc["seed"] == 4
        assert doc["version"] == __version__
        assert doc["outputs"] == ["trials_p03.csv"]
        assert doc["argv"][-2:] == ["--participant", "3"]  # type: ignore[index]


class TestRecommend:
    """Test the recommend and overlap commands."""

    def test_recommend(self, out_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the ranking output for glass rendered as ceramics."""
        assert run(out_dir, "recommend", "Glass", "Ceramics") == 0
        assert "recommended: A1" in capsys.readouterr().out
        with (out_dir / "recommend_Glass_as_Ceramics.csv").open(newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["rank", "stimulus", "score", "direction_ok"]
        assert rows[1][:2] == ["1", "A1"]
        assert len(rows) == 8

    def test_identity(self, out_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that X as X exits with the usage code."""
        assert run(out_dir, "recommend", "Glass", "Glass") == EXIT_USAGE
        assert error_payload(capsys)["error"] == "SubstitutionError"

    def test_unknown_material(self, out_dir: Path) -> None:
        """Test that an unknown material name is a usage error."""
        assert run(out_dir, "recommend", "Glass", "Marble") == EXIT_USAGE

    def test_overlap(self, out_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the JSON overlap output."""
        assert run(out_dir, "overlap", "Glass:A1", "Ceramics:N") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["overlap"] == pytest.approx(0.7424, abs=1e-3)
        assert doc["a"] == "Glass:A1"


class TestStepSweep:
    """Test the step-sweep command."""

    def test_single_target(self, out_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the files and the timing line for one 10 kPa step."""
        code = run(out_dir, "step-sweep", "--targets-kpa", "10", "--hold-s", "5", "--no-plots")
        assert code == 0
        assert "10 kPa activation" in capsys.readouterr().out
        assert (out_dir / "steps" / "step_10.0kPa.csv").is_file()
        outputs = manifest(out_dir)["outputs"]
        assert "step_metrics.csv" in outputs  # type: ignore[operator]
        assert "steps/step_10.0kPa.csv" in outputs  # type: ignore[operator]
        assert len(str(manifest(out_dir)["config_hash"])) == 64
        reference = (out_dir / "step_reference.csv").read_text().splitlines()
        assert reference[-1].startswith("average,")

    def test_target_out_of_range(self, out_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that a target above 12 kPa exits with the range code."""
        assert run(out_dir, "step-sweep", "--targets-kpa", "13") == EXIT_RANGE
        assert error_payload(capsys)["error"] == "RangeError"
        assert not (out_dir / "manifest.json").exists()

    def test_bad_number_list(self, out_dir: Path) -> None:
        """Test that a malformed list is a usage error."""
        assert run(out_dir, "step-sweep", "--targets-kpa", "ten") == EXIT_USAGE


class TestSynth:
    """Test the synth command."""

    def test_constant_speed(self, out_dir: Path) -> None:
        """Test a WAV rendered at a constant speed."""
        code = run(out_dir, "synth", "--speed-mm-s", "100", "--duration-s", "0.1", "--level", "A1")
        assert code == 0
        with wave.open(str(out_dir / "drive.wav")) as wav:
            assert wav.getframerate() == 3000
            assert wav.getnframes() == 300

    def test_pneumatic_level(self, out_dir: Path) -> None:
        """Test that a pneumatic level cannot be synthesized."""
        assert run(out_dir, "synth", "--speed-mm-s", "100", "--level", "B1") == EXIT_USAGE

    def test_needs_input(self, out_dir: Path) -> None:
        """Test that a speed source is required."""
        assert run(out_dir, "synth") == EXIT_USAGE


class TestScenario:
    """Test the scenario command."""

    def test_bundled(self, out_dir: Path) -> None:
        """Test the files of a bundled scenario."""
        assert run(out_dir, "scenario", "no-stimulus", "--no-plots") == 0
        summary = json.loads((out_dir / "no-stimulus_summary.json").read_text())
        assert summary["commands"] == []
        assert (out_dir / "no-stimulus_trace.csv").is_file()
        assert manifest(out_dir)["scenarios"] == ["no-stimulus"]

    def test_seed_override(self, out_dir: Path) -> None:
        """Test that --seed reaches the scenario."""
        assert run(out_dir, "--seed", "11", "scenario", "no-stimulus", "--no-plots") == 0
        summary = json.loads((out_dir / "no-stimulus_summary.json").read_text())
        assert summary["seed"] == 11

    def test_unknown(self, out_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that an unknown scenario exits with the config code."""
        assert run(out_dir, "scenario", "no-such-scenario") == EXIT_CONFIG
        assert error_payload(capsys)["error"] == "ConfigError"

    def test_needs_a_name(self, out_dir: Path) -> None:
        """Test that at least one scenario is required."""
        assert run(out_dir, "scenario") == EXIT_USAGE


class TestReplay:
    """Test the replay command."""

    def test_replay(self, out_dir: Path, tmp_path: Path) -> None:
        """Test replaying a short event log."""
        events = tmp_path / "events.ndjson"
        events.write_text(
            '{"seq":0,"t_ms":0,"kind":"ContactBegin","material":"Glass"}\n'
            "garbage\n"
            '{"seq":1,"t_ms":300,"kind":"ContactEnd","material":"Glass"}\n'
        )
        code = run(out_dir, "replay", "--events", str(events), "--map", "Glass=A1")
        assert code == 0
        lines = (out_dir / "replay.ndjson").read_text().splitlines()
        kinds = [json.loads(line)["kind"] for line in lines]
        assert kinds == ["StimulusCmd", "Error", "StimulusCmd"]

    def test_needs_mapping(self, out_dir: Path, tmp_path: Path) -> None:
        """Test that replay without --map is a usage error."""
        events = tmp_path / "events.ndjson"
        events.write_text("")
        assert run(out_dir, "replay", "--events", str(events)) == EXIT_USAGE

    def test_missing_file(self, out_dir: Path, tmp_path: Path) -> None:
        """Test that an unreadable event log exits with the generic code."""
        code = run(out_dir, "replay", "--events", str(tmp_path / "nope"), "--map", "Glass=A1")
        assert code == 1


class TestCalibrate:
    """Test the calibrate command."""

    def test_single_candidate(self, out_dir: Path) -> None:
        """Test a one-point grid writes a loadable controller config."""
        code = run(
            out_dir,
            "calibrate",
            "--flow", "3.525",
            "--leak", "0.04",
            "--kp", "0.2",
            "--ki", "1.0",
        )  # fmt: skip
        assert code == 0
        doc = json.loads((out_dir / "pneumo_calibrated.json").read_text())
        assert doc["schema"] == 1
        assert doc["calibration"]["method"] == "grid"
        assert manifest(out_dir)["candidates"] == 1

    def test_non_positive_value(self, out_dir: Path) -> None:
        """Test that a zero grid value is rejected."""
        assert run(out_dir, "calibrate", "--kp", "0") == EXIT_RANGE
