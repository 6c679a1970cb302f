"""Exception types raised by the library."""


class QepiError(Exception):
    """Base class for all library errors."""


class InvalidParameter(QepiError, ValueError):
    pass


class CutoffTooSmall(QepiError):
    """The Fock cutoff drops more probability mass than allowed."""


class DimensionMismatch(QepiError, ValueError):
    pass


class ConvergenceFailure(QepiError):
    pass


class ZeroState(QepiError):
    """Every eigenvalue lies below the support floor."""


class SupportTooHigh(QepiError):
    """The operator reaches photon numbers where truncated ladder operators are inexact."""


class SupportDeficient(QepiError):
    """A phi-type multiplier is infinite on a pair that carries weight."""


class QuadratureBudgetExceeded(QepiError):
    pass


class ExpmDimensionLimit(QepiError):
    pass


class EmptySubset(QepiError, ValueError):
    pass


class UnsupportedMix(QepiError):
    """Classical convolution of a Gaussian with a general finite distribution."""


class SlowDecay(QepiError):
    """The characteristic function has not decayed at the quadrature boundary."""


class InfeasibleConfiguration(QepiError):
    pass


class ConfigInvalid(QepiError):
    pass


class BudgetExceeded(QepiError):
    pass
