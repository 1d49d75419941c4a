"""
Error hierarchy.

Every failure the library reports on purpose is a RatLimitsError. The class
attribute ``exit_code`` is what the command line returns for it:
2 = schema error, 3 = numerical failure, 4 = hypothesis unmet.
"""
from __future__ import annotations

from typing import Any


class RatLimitsError(Exception):
    exit_code: int = 1

    def __init__(self, message: str = "", **details: Any) -> None:
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details: dict[str, Any] = details

    def to_report(self) -> dict[str, Any]:
        return {
            "error": self.__class__.__name__,
            "message": self.message,
            "details": self.details,
        }


# --- schema class ---
class SchemaError(RatLimitsError):
    exit_code = 2


# --- numerical class ---
class NumericalFailure(RatLimitsError):
    exit_code = 3


class NotCauchy(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


class RootFindingDiverged(NumericalFailure):
    pass


class RankAmbiguity(NumericalFailure):
    pass


class CoefficientOverflow(NumericalFailure):
    pass


class ScalingFailed(NumericalFailure):
    pass


class NonMonotone(NumericalFailure):
    pass


class ContainmentFailed(NumericalFailure):
    pass


class DegreeMismatch(NumericalFailure):
    pass


class InconclusiveK(NumericalFailure):
    pass


class NotConverging(NumericalFailure):
    pass


class CriticalCountMismatch(NumericalFailure):
    pass


class ContinuityFailure(NumericalFailure):
    pass


class NotATree(NumericalFailure):
    pass


# --- hypothesis class ---
class HypothesisFailure(RatLimitsError):
    exit_code = 4


class HypothesisUnmet(HypothesisFailure):
    pass


class CaseUndetermined(HypothesisFailure):
    pass


class NotIndependent(HypothesisFailure):
    pass


class NotInM1o(HypothesisFailure):
    pass


class ExceptionalMass(HypothesisFailure):
    pass


class HoleMass(HypothesisFailure):
    pass


class NotDegenerate(HypothesisFailure):
    pass


class SpecializationDegenerate(HypothesisFailure):
    pass


class Indeterminate(HypothesisFailure):
    pass


class DegenerateTriple(HypothesisFailure):
    pass


class HoleEvaluation(HypothesisFailure):
    pass
