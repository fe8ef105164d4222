"""Exception types shared across the toolkit."""


class DgmmError(Exception):
    """Base class for all toolkit errors."""


class NotDoubleWell(DgmmError):
    """A sampled point violates positivity of the potential off the wells."""


class NonWellTails(DgmmError):
    """A curve does not sit at a well near its endpoints."""


class NoConvergence(DgmmError):
    """An iterative solver stalled before reaching its tolerance."""


class HypothesisViolated(DgmmError):
    """An energy/length bound required by the theory does not hold."""


class NotAdmissible(DgmmError):
    """A (curve, alpha) pair fails the phase-region order property."""


class MidpointMismatch(DgmmError):
    """Phase-separating points differ beyond tolerance."""


class MidpointTooFar(DgmmError):
    """Phase-separating points exceed the h_tilde * sqrt(eps) gate."""


class BoundaryViolation(DgmmError):
    """A field violates its pinned strip / trace boundary condition."""


class DegenerateField(DgmmError):
    """The potential term of a field vanishes (no interface present)."""


class LayerTooWide(DgmmError):
    """eps * scale_L exceeds 1, the transition layer does not fit in Q."""


class BudgetExceeded(DgmmError):
    """The energy of the slice-search band exceeds its allowed budget."""


class NoSlice(DgmmError):
    """No grid column in the selected subinterval meets the trace bound."""


class InvalidBounds(DgmmError):
    """Partial sums of the balanced-index sequences exceed their bounds."""


class BetaOutOfRange(DgmmError):
    """Translation amplitude beta outside (-1, 1)."""


class InputError(DgmmError):
    """Malformed configuration or request."""
