"""Exception hierarchy shared by the dmm modules."""

from __future__ import annotations


class DMMError(Exception):
    """Base class for every error raised by this package."""


class TokenError(DMMError, ValueError):
    """A token is not a nonempty string."""


class ReservedTokenError(TokenError):
    """A reserved token (``:number`` or ``:sample``) was used as a child key."""


class ParseError(DMMError, ValueError):
    """Malformed serialized vector. ``where`` is the key path to the offending node."""

    def __init__(self, message: str, where: tuple[str, ...] = ()) -> None:
        self.where = where
        if where:
            message = f"{message} (at {'/'.join(where)})"
        super().__init__(message)


class MatrixDepthError(DMMError, ValueError):
    """A network matrix has a nonzero path whose length is not 6."""

    def __init__(self, path: tuple[str, ...]) -> None:
        self.path = path
        super().__init__(
            f"matrix path {'/'.join(path) or '<empty>'} has length {len(path)}, expected 6"
        )


class UnknownNeuronTypeError(DMMError, KeyError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown neuron type {name!r}")

    def __str__(self) -> str:
        return self.args[0]


class DimensionError(DMMError, ValueError):
    """Matrix or stream shapes are inconsistent."""


class InvariantBrokenError(DMMError):
    """A documented dynamical invariant no longer holds."""


class NetworkFileError(DMMError, ValueError):
    """A network definition file failed validation."""
