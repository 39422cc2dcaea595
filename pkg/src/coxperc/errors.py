"""Exception hierarchy.

Two families matter to the command line: ``ValidationError`` (bad input,
exit code 2) and ``BudgetError`` (a resource cap was hit, exit code 3).
"""


class CoxpercError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CoxpercError, ValueError):
    pass


class BudgetError(CoxpercError, RuntimeError):
    pass


# coxeter
class InvalidCoxeterMatrix(ValidationError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class AsymmetricMatrix(InvalidCoxeterMatrix):
    pass


class DiagonalNotOne(InvalidCoxeterMatrix):
    pass


class OffDiagonalBelowTwo(InvalidCoxeterMatrix):
    pass


class SphericalFourSubset(ValidationError):
    pass


# growth
class UnsupportedRank(ValidationError):
    pass


class NoRootInUnitInterval(ValidationError):
    pass


class KTooSmall(ValidationError):
    pass


class ExceptionalNerve(ValidationError):
    """Nerve is one of the degenerate shapes excluded from the growth comparison."""


# spectral
class RadicandNegative(ValidationError):
    pass


# cayley
class ModeUnsupported(ValidationError):
    pass


class RadiusTooLarge(BudgetError):
    pass


class LevelTie(CoxpercError):
    """Two adjacent vertices at equal length: the element canonicalization is broken."""


# cycles
class BudgetExceeded(BudgetError):
    pass


class NotRegularWithinHorizon(ValidationError):
    pass


class OutsideDisc(ValidationError):
    pass


# cli
class UnknownCommand(ValidationError):
    pass


class BadFlag(ValidationError):
    pass


class CacheMiss(ValidationError):
    pass
