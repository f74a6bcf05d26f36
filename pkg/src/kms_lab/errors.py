"""Exception hierarchy shared by all kms_lab modules."""


class KmsLabError(Exception):
    """Base class for every error raised by kms_lab."""


class NotHermitian(KmsLabError, ValueError):
    pass


class NotPositiveDefinite(KmsLabError, ValueError):
    pass


class ConvergenceFailure(KmsLabError, ArithmeticError):
    pass


class IndexMismatch(KmsLabError, ValueError):
    """Hölder-type index constraint violated."""


class IndexOrdering(KmsLabError, ValueError):
    pass


class ZeroInput(KmsLabError, ValueError):
    pass


class NotFaithful(KmsLabError, ValueError):
    pass


class NotNormalized(KmsLabError, ValueError):
    pass


class BudgetExhausted(KmsLabError, ArithmeticError):
    """A series could not be certified to the requested tolerance within its budget."""


class TailNotCertified(KmsLabError, ArithmeticError):
    pass


class RefinementOverflow(KmsLabError, OverflowError):
    pass


class DomainViolation(KmsLabError, ValueError):
    pass


class HypothesisViolated(KmsLabError, ValueError):
    pass


class ConfigInvalid(KmsLabError, ValueError):
    pass


class ParseError(ConfigInvalid):
    pass


class ValidationError(ConfigInvalid):
    pass


class IoFailure(KmsLabError, OSError):
    pass
