"""Error taxonomy shared across the package."""

from __future__ import annotations


class InterconError(Exception):
    """Base class for every error this package raises on purpose."""


class PreconditionError(InterconError):
    """An operation was invoked outside its stated contract."""


class LoadError(InterconError):
    """A formula or network file failed load-time validation."""


class ProtocolError(InterconError):
    """The external world misbehaved at the wire level."""


class UnresolvedExternalError(ProtocolError):
    """Solving needed an external symbol and nobody could resolve it."""

    def __init__(self, symbol: str, detail: str = "") -> None:
        self.symbol = symbol
        msg = f"external symbol {symbol!r} needs resolution"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class EngineError(InterconError):
    """A round could not be completed; the configuration is unchanged."""
