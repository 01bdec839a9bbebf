"""Exception hierarchy shared by all modules."""


class CoverBettiError(Exception):
    """Base class for every error raised by this package."""


class InputError(CoverBettiError):
    """Malformed or inconsistent user input."""


class BudgetError(CoverBettiError):
    """A configured size budget would be exceeded."""


class ElementCapExceeded(BudgetError):
    pass


class BudgetExceeded(BudgetError):
    pass


class NotHomomorphism(InputError):
    """A relator does not map to the identity matrix."""


class MismatchedPresentation(InputError):
    pass


class RelatorNotKilled(InputError):
    """A relator has nonzero image under the abelianization map."""


class InsufficientLevels(CoverBettiError):
    pass


class FieldTooSmall(CoverBettiError):
    pass


class DegenerateMatrix(CoverBettiError):
    """Every relevant minor vanishes, so no polynomial can be extracted."""


class IdentityViolated(CoverBettiError):
    """A structural identity failed; this indicates a linear-algebra bug."""


class MonotonicityViolated(CoverBettiError):
    """Normalized F_p Betti numbers increased along a p-power subtower."""
