"""Exception hierarchy shared by all limbswap modules."""

from __future__ import annotations


class LimbswapError(Exception):
    """Base class for every error raised by this package."""


class RangeError(LimbswapError, ValueError):
    """A scalar or vector field is outside its declared range."""


class DegenerateError(LimbswapError, ValueError):
    """A value is unusable: zero quaternion, non-finite coordinate, etc."""


class OrderError(LimbswapError, ValueError):
    """Timestamps are not in the required order."""


class TooShort(LimbswapError, ValueError):
    """A trace has too few frames for the requested operation."""


class UnknownGenerator(LimbswapError, KeyError):
    """Requested synthetic trace generator does not exist."""


class BadParameter(LimbswapError, ValueError):
    """A generator or config parameter is invalid."""


class ParseError(LimbswapError, ValueError):
    """A file or stream could not be parsed.

    ``line`` carries the 1-based line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class UnsupportedFormat(LimbswapError, ValueError):
    """The file is recognizably in a format this package refuses to read."""


class SchemaError(LimbswapError, ValueError):
    """A structured document violates its schema.

    ``path`` is a dotted/indexed field path such as ``anchors[2].role``.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class InvariantError(LimbswapError, ValueError):
    """A structurally valid document violates a semantic invariant."""


class DegenerateCloud(LimbswapError, ValueError):
    """Point cloud has insufficient rank for box fitting."""


class UnknownProsthesis(LimbswapError, KeyError):
    """Prosthesis id not present in the catalog."""


class UnknownTask(LimbswapError, KeyError):
    """Task id is not one of the supported tasks."""


class BadConfig(LimbswapError, ValueError):
    """Session or task configuration violates its invariants."""


class ProtocolError(LimbswapError, ValueError):
    """Wire-protocol violation. ``code`` is a stable machine-readable token."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail
