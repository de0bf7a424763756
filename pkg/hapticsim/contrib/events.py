"""Run-scoped manifest fields collected while a command executes."""

from __future__ import annotations

from collections.abc import Generator, Mapping
from contextlib import contextmanager
from contextvars import ContextVar
from pathlib import Path
from typing import Any

_current_manifest: ContextVar[dict[str, Any] | None] = ContextVar(
    "hapticsim_current_manifest",
    default=None,
)


@contextmanager
def run_manifest(
    fields: Mapping[str, Any] | None = None,
) -> Generator[dict[str, Any], None, None]:
    """Open a manifest field bag for the duration of a run.

    The yielded dictionary is shared with :func:`add_manifest_fields` and
    :func:`record_output`. Nested contexts restore the previous manifest.
    """
    manifest = dict(fields or {})
    manifest.setdefault("outputs", [])
    token = _current_manifest.set(manifest)
    try:
        yield manifest
    finally:
        _current_manifest.reset(token)


def get_manifest_fields() -> dict[str, Any]:
    """Return a copy of the active manifest, or an empty dict."""
    return dict(_current_manifest.get() or {})


def add_manifest_fields(fields: Mapping[str, Any] | None = None, **kwargs: Any) -> bool:
    """Merge fields into the active manifest.

    Returns ``False`` (and does nothing) outside :func:`run_manifest`.
    """
    manifest = _current_manifest.get()
    if manifest is None:
        return False
    if fields:
        manifest.update(fields)
    if kwargs:
        manifest.update(kwargs)
    return True


def record_output(path: str | Path, *, root: str | Path | None = None) -> bool:
    """Append an output file to the manifest, relative to ``root`` when given."""
    manifest = _current_manifest.get()
    if manifest is None:
        return False
    target = Path(path)
    if root is not None:
        try:
            target = target.relative_to(root)
        except ValueError:
            pass
    manifest["outputs"].append(target.as_posix())
    return True
