"""Exception hierarchy shared by all modules."""


class GraphonGameError(Exception):
    """Base class for all errors raised by this package."""


class MalformedPartition(GraphonGameError):
    """Breakpoints are not a strictly increasing partition of [0, 1]."""


class EmptyVector(GraphonGameError):
    """An equilibrium vector with no entries was supplied."""


class OutOfDomain(GraphonGameError):
    """A point outside [0, 1] was passed to a kernel or function."""


class NoConvergence(GraphonGameError):
    """An iterative scheme exhausted its iteration cap."""


class ParameterOutOfBox(GraphonGameError):
    """A parameter vector lies outside the admissible box."""


class NotAContraction(GraphonGameError):
    """The best-response map has no positive contraction margin."""


class SpectralConditionViolated(GraphonGameError):
    """The resolvent does not exist: aggregate coefficient times the
    operator's largest eigenvalue is >= 1."""


class SingularSystem(GraphonGameError):
    """A linear solve failed; unreachable when the spectral condition holds."""


class NotInterior(GraphonGameError):
    """Derivative formulas were requested at a projected (non-interior)
    equilibrium, where they are not valid."""


class DegenerateAggregate(GraphonGameError):
    """A community has a non-positive equilibrium aggregate, so the
    identifiability constant is undefined."""


class InfeasibleParameterSet(GraphonGameError):
    """Some corner of the parameter box violates the spectral condition."""


class NoStart(GraphonGameError):
    """The feasible parameter region is empty; no start point exists."""


class EmptyGroup(GraphonGameError):
    """Quantile summary requested over an empty record group."""


class ConfigError(GraphonGameError):
    """An experiment configuration is malformed or inconsistent."""
