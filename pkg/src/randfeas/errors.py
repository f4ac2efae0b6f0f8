"""Exception hierarchy shared by every module of the package."""


class RandFeasError(Exception):
    """Base class for all errors raised by randfeas."""


class PreconditionViolated(RandFeasError, ValueError):
    """A bound was requested outside the hypotheses under which it holds."""


class DegenerateBound(RandFeasError, ArithmeticError):
    """A closed-form bound would divide by a nonpositive quantity."""


class ParameterOutOfRange(RandFeasError, ValueError):
    pass


class ConnectivityUnreachable(RandFeasError):
    """Rejection sampling for a connected graph hit its attempt cap."""


class GraphDisconnected(RandFeasError):
    pass


class NegativeWeight(RandFeasError, ValueError):
    pass


class InstanceTooLarge(RandFeasError, ValueError):
    pass


class DenominatorNearZero(RandFeasError, ArithmeticError):
    """The sampled denominator is not distinguishable from zero."""


class ConfigInvalid(RandFeasError, ValueError):
    pass


class EmptyInput(RandFeasError, ValueError):
    pass
