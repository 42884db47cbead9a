"""Exception hierarchy.

Input validation problems raise plain ``ValueError``; numerical failures of a
solver raise a :class:`SolverError` subclass so callers (and the CLI exit
codes) can tell the two apart.
"""


class SolverError(RuntimeError):
    """A numerical method failed to produce a usable result."""


class SingularSystemError(SolverError):
    """The Newton linearization could not be inverted."""


class DivergenceError(SolverError):
    """Newton increments kept growing."""


class StepCollapseError(SolverError):
    """Adaptive time step shrank below the allowed minimum."""


class BlowUpError(SolverError):
    """NaN or Inf appeared in a time step."""


class RecursionBreakdown(SolverError):
    """The equilibrium recursion produced clearly negative terms."""


class NegativeStateError(SolverError):
    """A fixed-step run reached a clearly negative state at a snapshot."""
