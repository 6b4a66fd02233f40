"""Exception types raised by the solver, simulator and model loader."""


class FirstPassageError(Exception):
    pass


class CertificateInfeasible(FirstPassageError):
    """alpha * beta >= 1 for the requested weight, so the operator need not contract."""


class NotConverged(FirstPassageError):
    """Raised when max_iter is hit first. The partial result rides along in ``result``."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class InfeasibleAction(FirstPassageError):
    pass


class TooLarge(FirstPassageError):
    pass


class SolveFailed(FirstPassageError):
    pass


class BoundViolation(FirstPassageError):
    """A certified inequality failed numerically. Signals a defect, not bad input."""


class MissingTargetDynamics(FirstPassageError):
    pass


class PolicyUndefined(FirstPassageError):
    pass


class ExcursionStalled(FirstPassageError):
    pass


class ParseError(FirstPassageError):
    pass


class ValidationError(FirstPassageError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid model")
