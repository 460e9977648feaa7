"""Exception hierarchy.

Every input problem raises a subclass of :class:`ValidationError`, which the
CLI maps to exit code 2. An all-reject measurement has an undefined
postselected error; that case raises :class:`UndefinedError` and is kept out
of the validation branch on purpose.
"""


class PostselError(Exception):
    """Root of all package errors."""


class ValidationError(PostselError, ValueError):
    """Input violates a documented invariant."""


class UndefinedError(PostselError, ArithmeticError):
    """Postselected error requested for a measurement that never accepts."""


class ConvergenceFailure(PostselError, RuntimeError):
    """Jacobi sweeps did not reach the off-diagonal target within budget."""


class HermDefectTooLarge(ValidationError):
    pass


class NotPSD(ValidationError):
    def __init__(self, which="operator", min_eig=None):
        self.which = which
        self.min_eig = min_eig
        msg = f"{which} is not positive semidefinite"
        if min_eig is not None:
            msg += f" (min eigenvalue {min_eig:.3e})"
        super().__init__(msg)


class ZeroOperator(ValidationError):
    pass


class DimMismatch(ValidationError):
    pass


class BadRank(ValidationError):
    pass


class BadPrior(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class ZeroProjector(ValidationError):
    pass


class SumExceedsIdentity(ValidationError):
    pass


class UnequalSupports(ValidationError):
    pass


class EqualSupports(ValidationError):
    pass


class CaseMismatch(ValidationError):
    pass


class CBoundViolated(ValidationError):
    pass


class MembershipViolated(ValidationError):
    pass


class SetEmptyForSupports(ValidationError):
    pass


class ZeroOverlap(ValidationError):
    pass


class ProjectorsNotOrthogonal(ValidationError):
    pass
