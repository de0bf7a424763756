"""Timing decorator for simulation runs and CLI commands.

Example:
    >>> from hapticsim.contrib import timed
    >>>
    >>> @timed
    ... def sweep(targets):
    ...     ...
    >>>
    >>> sweep([6, 8, 10])
    # Logs: "sweep finished" with elapsed_s=0.412
"""

from __future__ import annotations

import inspect
from collections.abc import Callable
from functools import wraps
from time import perf_counter
from typing import Any, TypeVar, overload

from .._log import get_logger

F = TypeVar("F", bound=Callable[..., Any])

_log = get_logger("timing")


def _callable_name(fn: Any) -> str:
    return getattr(fn, "__qualname__", None) or getattr(fn, "__name__", None) or repr(fn)


@overload
def timed(fn: F) -> F: ...


@overload
def timed(*, level: str = ..., name: str | None = ...) -> Callable[[F], F]: ...


def timed(
    fn: F | None = None,
    *,
    level: str = "DEBUG",
    name: str | None = None,
) -> F | Callable[[F], F]:
    """Log the wall-clock duration of a sync or async callable.

    Works with or without parentheses. The record carries ``elapsed_s`` and ``ok``
    (``False`` when the call raised); exceptions propagate unchanged.

    Args:
        fn: The function to wrap (when used without parentheses).
        level: Log level of the timing record.
        name: Label for the record; defaults to the function's qualified name.
    """

    def decorator(func: F) -> F:
        label = name or _callable_name(func)

        if inspect.iscoroutinefunction(func):

            @wraps(func)
            async def async_wrapper(*args: Any, **kwargs: Any) -> Any:
                start = perf_counter()
                ok = False
                try:
                    result = await func(*args, **kwargs)
                    ok = True
                    return result
                finally:
                    elapsed = round(perf_counter() - start, 6)
                    _log.log(level, "{label} finished", label=label, elapsed_s=elapsed, ok=ok)

            return async_wrapper  # type: ignore[return-value]

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            start = perf_counter()
            ok = False
            try:
                result = func(*args, **kwargs)
                ok = True
                return result
            finally:
                elapsed = round(perf_counter() - start, 6)
                _log.log(level, "{label} finished", label=label, elapsed_s=elapsed, ok=ok)

        return wrapper  # type: ignore[return-value]

    if fn is not None:
        return decorator(fn)
    return decorator
