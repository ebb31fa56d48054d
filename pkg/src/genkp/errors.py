"""Exception hierarchy shared by all genkp modules."""


class GenKPError(Exception):
    """Base class for every error raised by genkp."""


class DomainError(GenKPError, ValueError):
    """An input lies outside the domain of the operation."""


class PoleError(GenKPError, ZeroDivisionError):
    """A quantity diverges at the requested input (scattering-length or CIR pole)."""


class SingularityError(GenKPError, ZeroDivisionError):
    """The dispersion relation is singular (a_e equal to a_o)."""


class InsufficientRangeError(GenKPError):
    """Fewer roots than requested were found below the k ceiling."""


class ComplexBranchError(GenKPError):
    """The characteristic exponent nu left the real branch."""


class ConvergenceError(GenKPError):
    """A truncated series or recursion did not converge."""


class ResolutionError(GenKPError):
    """A grid is too coarse for the requested accuracy."""


class DegeneracyError(GenKPError):
    """A linear system is degenerate (for example at a band edge)."""


class InGapError(GenKPError):
    """The energy lies inside a band gap."""


class GridError(GenKPError, ValueError):
    """Two sampled objects do not share a grid, or a q set is incomplete."""
