"""Exception types raised by the bound and estimator routines."""


class LocalizationError(Exception):
    """Base class for all package errors."""


class DegenerateGeometryError(LocalizationError, ValueError):
    def __init__(self, detail=""):
        msg = "degenerate geometry"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class CovarianceError(LocalizationError, ArithmeticError):
    """Shadowing covariance could not be factorized."""


class BroadsideSingularityError(LocalizationError, ValueError):
    def __init__(self, theta_tilde=None):
        msg = "broadside singularity"
        if theta_tilde is not None:
            msg = f"{msg}: |orientation error| = {abs(theta_tilde):.6g} rad >= pi/2"
        super().__init__(msg)


class QuadratureError(LocalizationError, ArithmeticError):
    def __init__(self, detail=""):
        super().__init__(f"quadrature failed{': ' + detail if detail else ''}")


class SpecialFunctionError(LocalizationError, ArithmeticError):
    def __init__(self, detail=""):
        super().__init__(f"special function failure{': ' + detail if detail else ''}")


class UnlocalizableError(LocalizationError, ArithmeticError):
    """The information matrix (or normal equations) is singular or too ill-conditioned.

    Attributes
    ----------
    condition_number : float
        Ratio of the largest to the smallest eigenvalue; ``inf`` when singular.
    """

    def __init__(self, condition_number, what="configuration"):
        self.condition_number = float(condition_number)
        super().__init__(
            f"unlocalizable {what} (condition number {self.condition_number:.3e})"
        )
