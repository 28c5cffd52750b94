"""Exception hierarchy shared across the package."""


class CrewSchedError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidInstanceError(CrewSchedError):
    """A problem instance or profile violates a structural invariant."""


class InfeasibleModelError(CrewSchedError):
    """A formulation cannot be built because no feasible assignment can exist."""


class SolverCapacityError(CrewSchedError):
    """The model exceeds the solver's configured memory envelope."""


class FormatError(CrewSchedError):
    """A serialized artifact is malformed or has an unsupported version."""


class DegenerateSamplesError(CrewSchedError):
    """A statistical test received input it cannot produce a p-value for."""
