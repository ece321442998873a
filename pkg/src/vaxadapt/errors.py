"""Exception types raised by the toolkit."""


class VaxAdaptError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(VaxAdaptError, ValueError):
    """An argument lies outside its documented range."""


class DomainError(VaxAdaptError, ValueError):
    """A state value P lies outside [0, 1]."""


class PreconditionError(VaxAdaptError, ValueError):
    """An operation was called on an input it does not support."""


class NumericalError(VaxAdaptError, RuntimeError):
    """A numerical procedure failed to meet its tolerance."""


class QuadratureError(NumericalError):
    pass


class DegenerateEquilibriumError(NumericalError):
    """Sensitivity requested at an equilibrium with vanishing f'(P)."""
