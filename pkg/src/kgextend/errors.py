"""Exception types shared across the toolkit.

Every error raised on bad user input derives from :class:`KgError` so the
command line layer can map the whole family to a single exit code.
"""

from __future__ import annotations


class KgError(Exception):
    """Base class for all toolkit errors caused by invalid input or state."""


class DuplicateIdError(KgError):
    """An id was declared more than once within one graph."""


class DanglingRefError(KgError):
    """A record references an id that is never declared."""


class UnknownIdError(KgError):
    """A lookup used an id the graph does not contain."""


class CycleError(KgError):
    """The subclass relation contains a cycle."""


class ParseError(KgError):
    """A text input could not be parsed.

    Carries 1-based ``line`` and ``col`` so callers can point at the
    offending character.
    """

    def __init__(self, line: int, col: int, message: str) -> None:
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class UnknownPrefixError(ParseError):
    """A prefixed name used a prefix with no @prefix declaration."""


class IoError(KgError):
    """A file could not be read or written."""


class MissingSimError(KgError):
    """A required similarity value is absent for a candidate pair."""


class DegenerateDataError(KgError):
    """A training set cannot be used (e.g. it contains only one class)."""


class NonFiniteError(KgError):
    """A numeric array contained NaN or infinity."""


class LayoutMismatchError(KgError):
    """A feature vector does not match the layout a model was trained on."""


class LengthMismatchError(KgError):
    """Two sequences that must be aligned have different lengths."""


class EmptyPropertySetError(KgError):
    """An operation needs at least one property but the set was empty."""


class EmptyGraphError(KgError):
    """An operation needs a non-empty graph."""


class TooManySetsError(KgError):
    """Set-overlap statistics support at most five sets."""


class ConflictError(KgError):
    """An id collision could not be resolved under the strict policy."""


class ConfigError(KgError):
    """A run configuration is malformed or contains unknown keys."""
