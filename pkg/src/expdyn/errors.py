"""Exception types shared across the package."""


class ExpDynError(Exception):
    pass


class RangeExceeded(ExpDynError, ArithmeticError):
    """A log-polar value is too large to convert to native floats."""


class LambdaZero(ExpDynError, ValueError):
    pass


class NoConvergence(ExpDynError):
    pass


class TruncatedAtEscape(ExpDynError, IndexError):
    """Requested a derivative beyond the last point the orbit reached."""


class PoleHit(ExpDynError, ZeroDivisionError):
    """Evaluation point landed on a pole.

    ``where`` names the factor that vanished ("z=0", "z=1", "z=a") and
    ``branch`` holds the inverse-branch index when raised from a branch sum.
    """

    def __init__(self, where, branch=None):
        self.where = where
        self.branch = branch
        msg = f"pole hit at {where}"
        if branch is not None:
            msg += f" (branch k={branch})"
        super().__init__(msg)


class ZeroArgument(ExpDynError, ValueError):
    pass


class ImageAtForbiddenPole(ExpDynError, ValueError):
    def __init__(self, pole, image):
        self.pole = pole
        self.image = image
        super().__init__(f"f(a) = {image!r} lies on a forbidden pole (a = {pole!r})")


class MoebiusDegenerate(ExpDynError, ValueError):
    pass


class InsufficientSamples(ExpDynError, ValueError):
    pass


class EmptyGridAfterExclusion(ExpDynError, ValueError):
    pass


class ScanLimitError(ExpDynError, ValueError):
    """Scan job exceeds the resolution cap or has a degenerate region."""
