"""Stimulus scheduler: turns contact events into timed stimulus commands.

The scheduler is a single-threaded state machine. It orders input by ``seq``, keeps its
own monotonic clock (the highest ``t_ms`` seen), and numbers its output messages from 0.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import Literal

from ._errors import RangeError
from ._log import get_logger
from ._protocol import EventKind, SessionEvent
from ._types import Material, Stimulus

SchedulerMode = Literal["experiment", "bridge"]

MAX_STIMULUS_MS = 5000
EXPERIMENT_REFRACTORY_MS = 5000

_log = get_logger("scheduler")


@dataclass(frozen=True, slots=True)
class SchedulerConfig:
    """Timing limits for one session.

    Attributes:
        max_stimulus_ms: A stimulus is stopped automatically after this long.
        refractory_ms: Reset period after every stop before the next stimulus may start.
    """

    max_stimulus_ms: int = MAX_STIMULUS_MS
    refractory_ms: int = EXPERIMENT_REFRACTORY_MS

    def __post_init__(self) -> None:
        if self.max_stimulus_ms <= 0:
            raise RangeError("max_stimulus_ms must be positive")
        if self.refractory_ms < 0:
            raise RangeError("refractory_ms must be non-negative")

    @classmethod
    def for_mode(cls, mode: SchedulerMode) -> SchedulerConfig:
        """Experiment mode uses the 5 s reset; bridge mode has none."""
        if mode == "experiment":
            return cls()
        if mode == "bridge":
            return cls(refractory_ms=0)
        raise RangeError(f"unknown scheduler mode {mode!r}")


@dataclass(slots=True)
class _Active:
    material: Material
    stimulus: str
    start_ms: int


class StimulusScheduler:
    """Maps ``ContactBegin`` to the configured stimulus and enforces timing.

    Examples:
        >>> sched = StimulusScheduler({Material.GLASS: "A1"})
        >>> [e.stimulus for e in sched.feed(SessionEvent(0, 0, EventKind.CONTACT_BEGIN,
        ...                                              Material.GLASS))]
        ['A1']
        >>> [(e.t_ms, e.stimulus) for e in sched.flush()]
        [(5000, 'N')]
    """

    def __init__(
        self,
        mapping: Mapping[Material, Stimulus | str],
        config: SchedulerConfig | None = None,
    ) -> None:
        self.mapping = {m: (s if isinstance(s, str) else s.label) for m, s in mapping.items()}
        self.config = config or SchedulerConfig()
        self._active: _Active | None = None
        self._refractory_until = 0
        self._now = 0
        self._last_seq: int | None = None
        self._out_seq = 0

    @property
    def active(self) -> tuple[Material, str] | None:
        if self._active is None:
            return None
        return self._active.material, self._active.stimulus

    @property
    def refractory_until(self) -> int:
        return self._refractory_until

    @property
    def now(self) -> int:
        return self._now

    @property
    def deadline(self) -> int | None:
        """Session time of the automatic stop of the running stimulus, if any."""
        if self._active is None:
            return None
        return self._active.start_ms + self.config.max_stimulus_ms

    def _emit(
        self,
        t_ms: int,
        kind: EventKind,
        *,
        material: Material | None = None,
        stimulus: str | None = None,
        deferred: bool = False,
        reason: str | None = None,
    ) -> SessionEvent:
        event = SessionEvent(self._out_seq, t_ms, kind, material, stimulus, deferred, reason)
        self._out_seq += 1
        return event

    def _stop(self, t_ms: int) -> SessionEvent:
        assert self._active is not None
        material = self._active.material
        self._active = None
        self._refractory_until = t_ms + self.config.refractory_ms
        _log.debug("stop at {t_ms} ms", t_ms=t_ms, material=material.value)
        return self._emit(t_ms, EventKind.STIMULUS_CMD, material=material, stimulus="N")

    def advance(self, t_ms: int) -> list[SessionEvent]:
        """Move the clock forward, emitting the automatic stop if it is due."""
        self._now = max(self._now, t_ms)
        if self._active is None:
            return []
        deadline = self._active.start_ms + self.config.max_stimulus_ms
        if self._now >= deadline:
            return [self._stop(deadline)]
        return []

    def feed(self, event: SessionEvent) -> list[SessionEvent]:
        """Consume one input event and return the messages it produces.

        ``Error`` events are forwarded as they are and do not take part in seq ordering;
        they come from the decoder, not from the client's sequence.
        """
        if event.kind is EventKind.ERROR:
            return [self._emit(event.t_ms, EventKind.ERROR, reason=event.reason)]
        if self._last_seq is not None and event.seq <= self._last_seq:
            _log.warning("out-of-order seq {seq}", seq=event.seq, last=self._last_seq)
            return [
                self._emit(
                    event.t_ms,
                    EventKind.ERROR,
                    reason=f"out-of-order seq {event.seq} after {self._last_seq}",
                )
            ]
        self._last_seq = event.seq
        out = self.advance(event.t_ms)
        now = self._now

        if event.kind is EventKind.CONTACT_BEGIN:
            out.append(self._begin(event, now))
        elif event.kind is EventKind.CONTACT_END:
            active = self._active
            if active is not None and event.material in (None, active.material):
                out.append(self._stop(now))
        else:
            out.append(
                self._emit(
                    event.t_ms,
                    EventKind.ERROR,
                    reason=f"unexpected {event.kind.value} from client",
                )
            )
        return out

    def _begin(self, event: SessionEvent, now: int) -> SessionEvent:
        material = event.material
        assert material is not None
        stimulus = self.mapping.get(material)
        if stimulus is None:
            return self._emit(
                now, EventKind.ERROR, reason=f"no stimulus mapped for {material.value}"
            )
        if self._active is not None or now < self._refractory_until:
            _log.debug("deferred contact on {material}", material=material.value, t_ms=now)
            return self._emit(now, EventKind.ACK, material=material, deferred=True)
        if stimulus == "N":
            return self._emit(now, EventKind.ACK, material=material, stimulus="N")
        self._active = _Active(material, stimulus, now)
        _log.debug("start {stimulus} at {t_ms} ms", stimulus=stimulus, t_ms=now)
        return self._emit(now, EventKind.STIMULUS_CMD, material=material, stimulus=stimulus)

    def flush(self) -> list[SessionEvent]:
        """End of input: emit the timeout stop of a still-running stimulus."""
        if self._active is None:
            return []
        return [self._stop(self._active.start_ms + self.config.max_stimulus_ms)]


def schedule(
    events: Iterable[SessionEvent],
    mapping: Mapping[Material, Stimulus | str],
    config: SchedulerConfig | None = None,
) -> list[SessionEvent]:
    """Run a whole event stream through a fresh scheduler, including the final flush."""
    scheduler = StimulusScheduler(mapping, config)
    out: list[SessionEvent] = []
    for event in events:
        out.extend(scheduler.feed(event))
    out.extend(scheduler.flush())
    return out
