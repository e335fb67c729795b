"""Exception hierarchy shared by every module."""


class MsmError(Exception):
    """Base class for all library errors."""


class PoleError(MsmError):
    """A gamma function was evaluated at (or within tolerance of) a pole."""


class DivergenceError(MsmError):
    """A series was requested outside its domain of convergence."""


class NonConvergence(MsmError):
    """A series or quadrature exhausted its term/node budget before meeting tol."""


class TransformError(MsmError):
    """A hypergeometric connection formula is degenerate for the given parameters."""


class DomainError(MsmError):
    """An argument lies outside the domain where an evaluation is defined."""


class SliceError(DomainError):
    """The operator kernel is not evaluable on the requested support."""


class ConvergenceError(MsmError):
    """An operator integral is not absolutely convergent for the declared exponent."""


class StepError(MsmError):
    """Richardson extrapolation failed to reduce the finite-difference error."""


class ValidityError(MsmError):
    """A lemma or theorem validity condition does not hold."""


class SamplingExhausted(MsmError):
    """Rejection sampling failed to produce a valid parameter draw."""
