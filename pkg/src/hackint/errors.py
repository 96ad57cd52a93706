"""Exception taxonomy.

Every error raised by the library derives from :class:`HackintError` and
carries an ``exit_code`` used by the command line front end:

* 2 -- bad or inconsistent input data / parameters
* 3 -- the loss budget is infeasible
* 4 -- a numerical solver degraded (result may be inaccurate)
"""

from __future__ import annotations


class HackintError(Exception):
    exit_code = 1

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "exit_code": self.exit_code}


class DataError(HackintError, ValueError):
    exit_code = 2


class InfeasibleThetaError(HackintError, ValueError):
    exit_code = 3


class SolverDegradedError(HackintError, RuntimeError):
    exit_code = 4


# data / parameter errors
class DimensionMismatch(DataError):
    pass


class SingularGram(DataError):
    pass


class MissingTreatment(DataError):
    pass


class MissingFitContext(DataError):
    pass


class DegreesOfFreedomNonpositive(DataError):
    pass


class InvalidAlpha(DataError):
    pass


class NegativeSqrtArgument(DataError):
    pass


class SingleClass(DataError):
    pass


class EmptyRange(DataError):
    pass


class DegenerateDenominator(DataError):
    pass


class UnsupportedOrYu(DataError):
    pass


class RankDeficient(DataError):
    pass


class SubsetSpaceTooLarge(DataError):
    pass


class MissingColumn(DataError):
    pass


class NonNumericCell(DataError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyAfterFiltering(DataError):
    pass


# infeasible budgets
class ThetaBelowMinLoss(InfeasibleThetaError):
    pass


class NoFeasiblePoint(InfeasibleThetaError):
    pass


class NoFeasibleSample(InfeasibleThetaError):
    pass


# solver degradation
class DualStall(SolverDegradedError):
    def __init__(self, message: str, result=None, row: int | None = None):
        super().__init__(message)
        self.result = result
        self.row = row


class AllWeightsUnderflow(SolverDegradedError):
    pass
