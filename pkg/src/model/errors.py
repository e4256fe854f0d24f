class ReplicationError(Exception):
    """Base class for every failure raised by the replication analysis library."""


class ScenarioError(ReplicationError, ValueError):
    """A scenario, SF table or energy table violates one of its invariants."""


class SchemeConfigError(ReplicationError, ValueError):
    """A replication scheme configuration is inconsistent with its kind."""


class DomainError(ReplicationError, ValueError):
    """An argument lies outside the domain of a formula (e.g. d1 = 0, eta <= 2)."""


class NumericalConvergenceError(ReplicationError, ArithmeticError):
    """A series or root finder did not reach the configured tolerance."""


class ProbabilityRangeError(ReplicationError, ArithmeticError):
    """A computed probability left [0, 1] by more than the clamping tolerance."""


class InfeasiblePeriodError(ReplicationError, ValueError):
    """The active states of M copies do not fit inside the reporting period."""


class EnumerationBoundError(ReplicationError, ValueError):
    """Exhaustive enumeration was requested beyond the configured pattern bound."""
