"""Exception hierarchy.

Validation errors signal bad input; numerical errors signal that a
computation is ill-defined for otherwise valid input (a vanishing kernel,
a probe annihilated by postselection, a solver that did not converge).
The CLI maps the two families to different exit codes.
"""


class WeakProbeError(Exception):
    """Base class for all package errors."""


class ValidationError(WeakProbeError, ValueError):
    pass


class NumericalError(WeakProbeError, ArithmeticError):
    pass


class BadParams(ValidationError):
    pass


class DomainMismatch(ValidationError):
    pass


class OrthogonalSelection(ValidationError):
    """Pre- and postselected states are orthogonal; the weak value is undefined."""


class ZeroNorm(NumericalError):
    pass


class EmptySpectrum(NumericalError):
    pass


class PostselectionAnnihilated(NumericalError):
    pass


class DegenerateConstraints(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class KernelZero(NumericalError):
    """The postselection kernel vanishes inside the momentum domain."""

    def __init__(self, k_root):
        self.k_root = float(k_root)
        super().__init__(f"KernelZero at k≈{self.k_root:.4f}")


class NotConverged(NumericalError):
    """Raised by the stationary-point solver; ``result`` holds the best iterate."""

    def __init__(self, result, message="solver did not converge"):
        self.result = result
        super().__init__(f"NotConverged: {message}")
