"""Newline-delimited JSON wire format for contact events and stimulus commands.

One message per line, UTF-8, compact separators, keys in the fixed order
``seq, t_ms, kind, material, stimulus, deferred, reason`` with absent optional fields
omitted. Only canonically encoded lines are accepted, so ``encode_event(decode_event(m))``
returns ``m`` for every valid message ``m``.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum
from typing import Any

from ._errors import ProtocolError
from ._log import get_logger
from ._types import STIMULUS_LABELS, Material

U64_MAX = 2**64 - 1

_log = get_logger("protocol")

_MATERIALS = {m.value: m for m in Material}
_FIELD_ORDER = ("seq", "t_ms", "kind", "material", "stimulus", "deferred", "reason")


class EventKind(Enum):
    CONTACT_BEGIN = "ContactBegin"
    CONTACT_END = "ContactEnd"
    STIMULUS_CMD = "StimulusCmd"
    ACK = "Ack"
    ERROR = "Error"


_KINDS = {k.value: k for k in EventKind}


@dataclass(frozen=True, slots=True)
class SessionEvent:
    """One protocol message.

    A ``StimulusCmd`` with stimulus ``"N"`` stops actuation. ``deferred`` is only set on
    ``Ack`` and ``reason`` only on ``Error``.

    Attributes:
        seq: Per-connection sequence number.
        t_ms: Sender-relative timestamp in milliseconds.
        kind: Message kind.
        material: Touched material (required on ``ContactBegin``).
        stimulus: Stimulus label (required on ``StimulusCmd``).
        deferred: Ack of a contact that could not start a stimulus yet.
        reason: Human-readable cause of an ``Error``.
    """

    seq: int
    t_ms: int
    kind: EventKind
    material: Material | None = None
    stimulus: str | None = None
    deferred: bool = False
    reason: str | None = None

    def __post_init__(self) -> None:
        for name in ("seq", "t_ms"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ProtocolError(f"{name} must be an integer")
            if not 0 <= value <= U64_MAX:
                raise ProtocolError(f"{name} {value} outside the u64 range")
        if self.stimulus is not None and self.stimulus not in STIMULUS_LABELS:
            raise ProtocolError(f"unknown stimulus label {self.stimulus!r}")
        if self.kind is EventKind.CONTACT_BEGIN and self.material is None:
            raise ProtocolError("ContactBegin requires a material")
        if self.kind is EventKind.STIMULUS_CMD and self.stimulus is None:
            raise ProtocolError("StimulusCmd requires a stimulus")
        if self.stimulus is not None and self.kind not in (EventKind.STIMULUS_CMD, EventKind.ACK):
            raise ProtocolError(f"{self.kind.value} does not carry a stimulus")
        if self.deferred and self.kind is not EventKind.ACK:
            raise ProtocolError("only Ack can be deferred")
        if self.kind is EventKind.ERROR:
            if not self.reason:
                raise ProtocolError("Error requires a reason")
            try:
                self.reason.encode("utf-8")
            except UnicodeEncodeError:
                raise ProtocolError("reason contains a lone surrogate") from None
        elif self.reason is not None:
            raise ProtocolError(f"{self.kind.value} does not carry a reason")

    @property
    def is_stop(self) -> bool:
        return self.kind is EventKind.STIMULUS_CMD and self.stimulus == "N"


def _as_dict(event: SessionEvent) -> dict[str, Any]:
    doc: dict[str, Any] = {"seq": event.seq, "t_ms": event.t_ms, "kind": event.kind.value}
    if event.material is not None:
        doc["material"] = event.material.value
    if event.stimulus is not None:
        doc["stimulus"] = event.stimulus
    if event.deferred:
        doc["deferred"] = True
    if event.reason is not None:
        doc["reason"] = event.reason
    return doc


def encode_event(event: SessionEvent) -> bytes:
    """Canonical UTF-8 encoding of one message, without the line terminator.

    Examples:
        >>> encode_event(SessionEvent(1, 20, EventKind.CONTACT_BEGIN, Material.GLASS))
        b'{"seq":1,"t_ms":20,"kind":"ContactBegin","material":"Glass"}'
    """
    return json.dumps(_as_dict(event), separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _reject_constant(name: str) -> Any:
    raise ProtocolError(f"non-finite number {name}")


def decode_event(line: bytes | str) -> SessionEvent:
    """Parse one line; a single trailing newline is ignored.

    Raises:
        ProtocolError: Invalid UTF-8 or JSON, missing or unknown fields, wrong types,
            unknown kind, material or stimulus, or a non-canonical encoding.
    """
    if isinstance(line, str):
        raw = line.encode("utf-8")
    else:
        raw = bytes(line)
    if raw.endswith(b"\n"):
        raw = raw[:-1]
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProtocolError(f"invalid UTF-8 at byte {exc.start}") from None
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc.msg}") from None
    except ValueError as exc:
        # integer strings beyond the interpreter digit limit
        raise ProtocolError(f"invalid JSON: {exc}") from None
    except RecursionError:
        raise ProtocolError("invalid JSON: nesting too deep") from None
    if not isinstance(doc, dict):
        raise ProtocolError("message must be a JSON object")

    unknown = set(doc) - set(_FIELD_ORDER)
    if unknown:
        raise ProtocolError(f"unknown field {sorted(unknown)[0]!r}")
    for name in ("seq", "t_ms", "kind"):
        if name not in doc:
            raise ProtocolError(f"missing field {name!r}")

    kind = _KINDS.get(doc["kind"]) if isinstance(doc["kind"], str) else None
    if kind is None:
        raise ProtocolError(f"unknown kind {doc['kind']!r}")

    material = None
    if "material" in doc:
        name = doc["material"]
        if not isinstance(name, str) or name not in _MATERIALS:
            raise ProtocolError(f"unknown material {name!r}")
        material = _MATERIALS[name]

    stimulus = doc.get("stimulus")
    if "stimulus" in doc and not isinstance(stimulus, str):
        raise ProtocolError("stimulus must be a string")

    deferred = doc.get("deferred", False)
    if "deferred" in doc and deferred is not True:
        raise ProtocolError("deferred must be true when present")

    reason = doc.get("reason")
    if "reason" in doc and not isinstance(reason, str):
        raise ProtocolError("reason must be a string")

    event = SessionEvent(
        seq=doc["seq"],
        t_ms=doc["t_ms"],
        kind=kind,
        material=material,
        stimulus=stimulus,
        deferred=deferred,
        reason=reason,
    )
    if encode_event(event) != raw:
        raise ProtocolError("non-canonical encoding")
    return event


def decode_stream(lines: Iterable[bytes | str]) -> Iterator[SessionEvent]:
    """Decode a stream line by line.

    Blank lines are skipped. A malformed line becomes an ``Error`` event whose ``seq``
    is the zero-based line index, and decoding continues.
    """
    for index, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            yield decode_event(line)
        except ProtocolError as exc:
            _log.debug("rejected line {index}: {reason}", index=index, reason=exc.reason)
            yield SessionEvent(seq=index, t_ms=0, kind=EventKind.ERROR, reason=exc.reason)
