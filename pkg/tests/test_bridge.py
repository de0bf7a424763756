"""Tests for the socket bridge and file replay."""

from __future__ import annotations

import asyncio
import json
from pathlib import Path
from typing import cast

import pytest

from hapticsim import EventKind, Material, SchedulerConfig, SessionEvent, encode_event
from hapticsim.contrib import BridgeSession, replay, serve
from hapticsim.contrib.bridge import MAX_LINE_BYTES

MAPPING = {Material.GLASS: "A1", Material.CERAMICS: "B3"}
BRIDGE = SchedulerConfig.for_mode("bridge")

LINES = [
    encode_event(SessionEvent(0, 0, EventKind.CONTACT_BEGIN, Material.GLASS)) + b"\n",
    b"not json\n",
    encode_event(SessionEvent(1, 250, EventKind.CONTACT_END, Material.GLASS)) + b"\n",
    encode_event(SessionEvent(2, 300, EventKind.CONTACT_BEGIN, Material.CERAMICS)) + b"\n",
]


class FakeWriter:
    """Collects what a session writes back."""

    def __init__(self) -> None:
        self.data = bytearray()

    def write(self, data: bytes) -> None:
        self.data.extend(data)

    async def drain(self) -> None:
        await asyncio.sleep(0)


def _kinds(raw: bytes) -> list[str]:
    return [json.loads(line)["kind"] for line in raw.splitlines()]


class TestServe:
    """Test the TCP listener end to end."""

    def test_round_trip(self) -> None:
        """Test that a client gets commands, errors and the final timeout stop."""
        seen: list[SessionEvent] = []

        async def scenario() -> bytes:
            server = await serve(MAPPING, BRIDGE, port=0, on_command=seen.append)
            host, port = server.sockets[0].getsockname()[:2]
            async with server:
                reader, writer = await asyncio.open_connection(host, port)
                writer.writelines(LINES)
                await writer.drain()
                writer.write_eof()
                data = await asyncio.wait_for(reader.read(), timeout=10)
                writer.close()
                await writer.wait_closed()
            return data

        data = asyncio.run(scenario())
        messages = [json.loads(line) for line in data.splitlines()]
        assert [m["kind"] for m in messages] == [
            "StimulusCmd",
            "Error",
            "StimulusCmd",
            "StimulusCmd",
            "StimulusCmd",
        ]
        assert [m.get("stimulus") for m in messages] == ["A1", None, "N", "B3", "N"]
        assert messages[-1]["t_ms"] == 5300
        assert [m["seq"] for m in messages] == list(range(5))
        assert len(seen) == 5

    def test_connections_are_independent(self) -> None:
        """Test that each connection has its own scheduler."""

        async def client(host: str, port: int) -> bytes:
            reader, writer = await asyncio.open_connection(host, port)
            writer.write(LINES[0])
            writer.write_eof()
            data = await asyncio.wait_for(reader.read(), timeout=10)
            writer.close()
            await writer.wait_closed()
            return data

        async def scenario() -> list[bytes]:
            server = await serve(MAPPING, BRIDGE, port=0)
            host, port = server.sockets[0].getsockname()[:2]
            async with server:
                return list(await asyncio.gather(client(host, port), client(host, port)))

        first, second = asyncio.run(scenario())
        assert first == second
        assert _kinds(first) == ["StimulusCmd", "StimulusCmd"]


class TestBridgeSession:
    """Test the queue and consumer of one session."""

    def test_capacity(self) -> None:
        """Test that the queue needs room for at least one event."""
        with pytest.raises(ValueError):
            BridgeSession(MAPPING, capacity=0)

    def test_intake_waits_when_full(self) -> None:
        """Test backpressure: the reader stops while the queue is full."""

        async def scenario() -> tuple[bool, bool, bytes]:
            session = BridgeSession(MAPPING, BRIDGE, capacity=1)
            reader = asyncio.StreamReader(limit=MAX_LINE_BYTES)
            reader.feed_data(b"".join(LINES))
            reader.feed_eof()
            intake = asyncio.create_task(session.intake(reader))
            for _ in range(5):
                await asyncio.sleep(0)
            full, blocked = session.queue.full(), not intake.done()
            fake = FakeWriter()
            await asyncio.gather(intake, session.consume(cast(asyncio.StreamWriter, fake)))
            return full, blocked, bytes(fake.data)

        full, blocked, data = asyncio.run(scenario())
        assert full
        assert blocked
        assert len(data.splitlines()) == 5

    def test_stops_when_client_goes_quiet(self) -> None:
        """Test that a running stimulus is stopped at its deadline without more input."""
        config = SchedulerConfig(max_stimulus_ms=100, refractory_ms=0)

        async def scenario() -> tuple[bytes, bytes]:
            session = BridgeSession(MAPPING, config)
            reader = asyncio.StreamReader(limit=MAX_LINE_BYTES)
            reader.feed_data(LINES[0])
            fake = FakeWriter()
            done = asyncio.gather(
                session.intake(reader), session.consume(cast(asyncio.StreamWriter, fake))
            )
            for _ in range(100):
                if len(fake.data.splitlines()) >= 2:
                    break
                await asyncio.sleep(0.02)
            before_eof = bytes(fake.data)
            reader.feed_eof()
            await done
            return before_eof, bytes(fake.data)

        before_eof, data = asyncio.run(scenario())
        messages = [json.loads(line) for line in before_eof.splitlines()]
        assert [m["stimulus"] for m in messages] == ["A1", "N"]
        assert messages[-1]["t_ms"] == 100
        assert data == before_eof

    def test_oversized_line(self) -> None:
        """Test that a line above the limit becomes an error and reading continues."""

        async def scenario() -> bytes:
            session = BridgeSession(MAPPING, BRIDGE)
            reader = asyncio.StreamReader(limit=MAX_LINE_BYTES)
            reader.feed_data(b"x" * (MAX_LINE_BYTES + 10) + b"\n" + LINES[0])
            reader.feed_eof()
            fake = FakeWriter()
            writer = cast(asyncio.StreamWriter, fake)
            await asyncio.gather(session.intake(reader), session.consume(writer))
            return bytes(fake.data)

        data = asyncio.run(scenario())
        messages = [json.loads(line) for line in data.splitlines()]
        assert messages[0]["kind"] == "Error"
        assert "exceeds" in messages[0]["reason"]
        assert messages[1]["stimulus"] == "A1"


class TestReplay:
    """Test offline replay."""

    def test_from_lines(self) -> None:
        """Test replay from an in-memory log."""
        out = replay(LINES, MAPPING, BRIDGE)
        assert [e.kind for e in out] == [
            EventKind.STIMULUS_CMD,
            EventKind.ERROR,
            EventKind.STIMULUS_CMD,
            EventKind.STIMULUS_CMD,
            EventKind.STIMULUS_CMD,
        ]
        assert out[1].seq == 1

    def test_from_file(self, tmp_path: Path) -> None:
        """Test replay from an NDJSON file matches the in-memory replay."""
        path = tmp_path / "events.ndjson"
        path.write_bytes(b"".join(LINES))
        assert replay(path, MAPPING, BRIDGE) == replay(LINES, MAPPING, BRIDGE)

    def test_experiment_mode_defers(self) -> None:
        """Test that the reset period applies in experiment mode."""
        out = replay(LINES, MAPPING, SchedulerConfig.for_mode("experiment"))
        assert out[3].kind is EventKind.ACK
        assert out[3].deferred
