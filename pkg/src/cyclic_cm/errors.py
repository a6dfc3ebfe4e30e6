"""Exception hierarchy for the cyclic Calogero-Moser toolkit."""


class CyclicCMError(Exception):
    """Base class for all errors raised by this package."""


class SingularMatrix(CyclicCMError):
    pass


class NoConvergence(CyclicCMError):
    """Raised when an iteration hits its cap.

    The best iterate and its residual are attached so callers can decide
    whether the result is usable anyway.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class DuplicateNodes(CyclicCMError):
    pass


class DegeneratePoint(CyclicCMError):
    pass


class DegenerateSpectrum(CyclicCMError):
    pass


class PoleAtZ(CyclicCMError):
    pass


class SamplingFailed(CyclicCMError):
    pass


class ZeroCoupling(CyclicCMError):
    pass


class EvaluationFailure(CyclicCMError):
    pass


class CollisionDetected(CyclicCMError):
    pass


class DivisibilityViolation(CyclicCMError):
    pass
