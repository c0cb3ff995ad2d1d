"""Exception hierarchy shared by all engines.

Each exception carries an ``exit_code`` used by the command-line front end:
2 schema, 3 precision, 4 hypothesis, 5 validation.
"""


class AswError(Exception):
    exit_code = 1


class SchemaError(AswError, ValueError):
    exit_code = 2


class PrecisionError(AswError):
    exit_code = 3


class IndeterminateAtPrecision(PrecisionError):
    """A predicate cannot be decided from the known coefficients."""


class NonTerminatingBudget(PrecisionError):
    """An elimination loop exceeded its step budget."""


class HypothesisViolated(AswError, ValueError):
    exit_code = 4


class NegativeValuation(HypothesisViolated):
    pass


class MixedContext(HypothesisViolated):
    """Germ (power series) and boundary (Laurent) elements were combined."""


class NotAPthPower(HypothesisViolated):
    pass


class TotallyRamified(HypothesisViolated):
    """The valuation of the defining function forces ramification index p."""


class RamifiedAssumptionViolated(TotallyRamified):
    pass


class NotInSpan(HypothesisViolated):
    pass


class RootExtensionNeeded(HypothesisViolated):
    """An m-th root of a unit of F_p only exists in F_{p^degree}."""

    def __init__(self, message: str, degree: int):
        super().__init__(message)
        self.degree = degree


class NonIntegralGenus(HypothesisViolated):
    pass


class NegativeGenus(HypothesisViolated):
    pass


class ValidationFailure(AswError):
    exit_code = 5


class CompatibilityFailure(ValidationFailure):
    pass


class ReducibleSpecialFibre(HypothesisViolated):
    """The first-level torsor is trivial, so the special fibre of the p^2 cover is not irreducible."""
