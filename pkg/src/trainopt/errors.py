"""Semantic exception hierarchy shared by all trainopt modules."""


class TrainoptError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TrainoptError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvalidScenarioError(DomainError):
    """A pilot scenario violates one of its structural invariants."""


class EvaluationError(TrainoptError):
    """A numerical evaluation produced non-finite or inconsistent values."""


class SingularMatrixError(TrainoptError):
    """A matrix that must be positive definite failed factorization."""


class AllInfeasibleError(TrainoptError):
    """Every candidate pilot fraction produced a clamped-to-zero rate."""


class InfeasibleError(TrainoptError):
    """A constrained subproblem has an empty feasible set."""


class MaxIterationsError(TrainoptError):
    """An iterative solver hit its iteration cap before meeting tolerances."""


class SolverError(TrainoptError):
    """An internal solver step (curvature estimate, projection) failed."""
