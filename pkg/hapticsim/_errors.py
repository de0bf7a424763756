"""Exception hierarchy for hapticsim.

Every error raised on purpose by the library derives from :class:`HapticSimError`,
which is itself a ``ValueError`` so callers validating input can catch either.
"""

from __future__ import annotations


class HapticSimError(ValueError):
    """Base class for all hapticsim errors."""


class UnknownLabelError(HapticSimError):
    """A stimulus label outside N/A1/A2/A3/B1/B2/B3."""

    def __init__(self, label: str) -> None:
        super().__init__(f"unknown stimulus label {label!r}; expected one of N, A1-A3, B1-B3")
        self.label = label


class UnknownMaterialError(HapticSimError):
    """A material name that does not resolve to a known material."""

    def __init__(self, name: str) -> None:
        super().__init__(f"unknown material {name!r}")
        self.name = name


class UnknownEntryError(HapticSimError):
    """A (material, stimulus) pair with no rating entry."""


class RangeError(HapticSimError):
    """A physical quantity outside its validated range."""


class NyquistError(RangeError):
    """The requested waveform frequency would alias at the configured sample rate."""


class TooFewSamplesError(HapticSimError):
    """Not enough landmark samples to estimate a velocity."""


class SubstitutionError(HapticSimError):
    """A material substitution request that makes no sense (e.g. X rendered as X)."""


class ProtocolError(HapticSimError):
    """A malformed or invalid session protocol message."""

    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


class ConfigError(HapticSimError):
    """Configuration or bundled data failed validation.

    Attributes:
        path: Dotted field path of the offending value (empty for whole-document errors).
    """

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
