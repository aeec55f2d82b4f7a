"""Exception hierarchy shared by the solver, generator and CLI."""

from __future__ import annotations


class NCCError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfig(NCCError, ValueError):
    pass


class InvalidBeta(InvalidConfig):
    pass


class DuplicateFragment(NCCError, KeyError):
    pass


class UnknownPredecessor(NCCError, KeyError):
    pass


class SaturatedEdge(NCCError):
    """A cycle was pushed through a residual arc with no remaining capacity."""


class CorruptFlow(NCCError):
    """Flow conservation is violated; a circulation cannot be traced."""


class NotATail(NCCError):
    pass


class SolverStall(NCCError):
    """An iteration or relaxation budget was exhausted."""


class OutOfOrderFragment(NCCError):
    """A fragment arrived with a last timestamp earlier than one already admitted."""


class TooLarge(NCCError):
    pass


class MissingLabel(NCCError):
    pass
