"""Transports for the session protocol: a local socket listener and file replay.

Each connection gets its own scheduler. An intake task decodes lines into a bounded
queue (the reader waits while the queue is full) and a single consumer task owns the
scheduler and writes its messages back on the same connection.

Example:
    >>> import asyncio
    >>> from hapticsim import Material
    >>> from hapticsim.contrib.bridge import serve
    >>>
    >>> async def main():
    ...     server = await serve({Material.GLASS: "A1"}, port=8765)
    ...     async with server:
    ...         await server.serve_forever()
    >>>
    >>> asyncio.run(main())
"""

from __future__ import annotations

import asyncio
from collections.abc import Awaitable, Callable, Iterable, Mapping
from pathlib import Path

from .._errors import ProtocolError
from .._log import get_logger
from .._protocol import EventKind, SessionEvent, decode_event, decode_stream, encode_event
from .._scheduler import SchedulerConfig, StimulusScheduler
from .._types import Material, Stimulus

QUEUE_CAPACITY = 1024
MAX_LINE_BYTES = 64 * 1024

CommandHook = Callable[[SessionEvent], Awaitable[None] | None]

_log = get_logger("bridge")


def _error(index: int, reason: str) -> SessionEvent:
    return SessionEvent(seq=index, t_ms=0, kind=EventKind.ERROR, reason=reason)


class BridgeSession:
    """Scheduler plus bounded intake queue for one connection."""

    def __init__(
        self,
        mapping: Mapping[Material, Stimulus | str],
        config: SchedulerConfig | None = None,
        *,
        capacity: int = QUEUE_CAPACITY,
        on_command: CommandHook | None = None,
    ) -> None:
        if capacity < 1:
            raise ValueError("queue capacity must be at least 1")
        self.scheduler = StimulusScheduler(mapping, config)
        self.queue: asyncio.Queue[SessionEvent | None] = asyncio.Queue(maxsize=capacity)
        self.on_command = on_command
        self.sent: list[SessionEvent] = []

    async def intake(self, reader: asyncio.StreamReader) -> None:
        """Decode lines until EOF; ``put`` waits whenever the queue is full."""
        index = 0
        try:
            while True:
                try:
                    line = await reader.readline()
                except ValueError:
                    error = f"line exceeds {MAX_LINE_BYTES} bytes"
                    await self.queue.put(_error(index, error))
                    index += 1
                    continue
                if not line:
                    break
                if line.strip():
                    try:
                        event = decode_event(line)
                    except ProtocolError as exc:
                        event = _error(index, exc.reason)
                    await self.queue.put(event)
                index += 1
        finally:
            await self.queue.put(None)

    async def consume(self, writer: asyncio.StreamWriter) -> None:
        """Feed queued events to the scheduler and write every resulting message.

        Session time follows the client's ``t_ms`` and runs on with the loop clock between
        events, so a running stimulus is stopped at its deadline even when the client
        goes quiet.
        """
        loop = asyncio.get_running_loop()
        anchor_wall, anchor_ms = loop.time(), self.scheduler.now
        while True:
            deadline = self.scheduler.deadline
            if deadline is None:
                event = await self.queue.get()
            else:
                remaining = (deadline - anchor_ms) / 1000.0 - (loop.time() - anchor_wall)
                try:
                    event = await asyncio.wait_for(self.queue.get(), max(remaining, 0.0))
                except asyncio.TimeoutError:
                    _log.debug("stimulus deadline {t_ms} ms reached while idle", t_ms=deadline)
                    for message in self.scheduler.advance(deadline):
                        await self._send(message, writer)
                    anchor_wall, anchor_ms = loop.time(), self.scheduler.now
                    continue
            out = self.scheduler.flush() if event is None else self.scheduler.feed(event)
            if event is not None and event.kind is not EventKind.ERROR:
                anchor_wall, anchor_ms = loop.time(), self.scheduler.now
            for message in out:
                await self._send(message, writer)
            if event is None:
                break

    async def _send(self, message: SessionEvent, writer: asyncio.StreamWriter) -> None:
        self.sent.append(message)
        writer.write(encode_event(message) + b"\n")
        await writer.drain()
        if self.on_command is not None:
            result = self.on_command(message)
            if result is not None:
                await result

    async def handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = writer.get_extra_info("peername")
        _log.info("connection from {peer}", peer=str(peer))
        try:
            await asyncio.gather(self.intake(reader), self.consume(writer))
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass
            _log.info("connection from {peer} closed", peer=str(peer), sent=len(self.sent))


async def serve(
    mapping: Mapping[Material, Stimulus | str],
    config: SchedulerConfig | None = None,
    *,
    host: str = "127.0.0.1",
    port: int = 0,
    capacity: int = QUEUE_CAPACITY,
    on_command: CommandHook | None = None,
) -> asyncio.Server:
    """Start a TCP listener; each connection runs an independent :class:`BridgeSession`.

    ``port=0`` picks a free port; read it from ``server.sockets[0].getsockname()``.
    """

    async def handler(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        session = BridgeSession(mapping, config, capacity=capacity, on_command=on_command)
        await session.handle(reader, writer)

    server = await asyncio.start_server(handler, host, port, limit=MAX_LINE_BYTES)
    address = server.sockets[0].getsockname()
    _log.info("bridge listening on {host}:{port}", host=address[0], port=address[1])
    return server


def replay(
    source: str | Path | Iterable[bytes | str],
    mapping: Mapping[Material, Stimulus | str],
    config: SchedulerConfig | None = None,
) -> list[SessionEvent]:
    """Run an NDJSON event log through a fresh scheduler and return its output.

    Malformed lines turn into ``Error`` messages and the replay carries on.
    """
    scheduler = StimulusScheduler(mapping, config)
    out: list[SessionEvent] = []
    if isinstance(source, (str, Path)):
        with Path(source).open("rb") as fh:
            for event in decode_stream(fh):
                out.extend(scheduler.feed(event))
    else:
        for event in decode_stream(source):
            out.extend(scheduler.feed(event))
    out.extend(scheduler.flush())
    _log.info("replayed {n} messages", n=len(out))
    return out
