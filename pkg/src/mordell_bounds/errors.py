"""Exception hierarchy shared by every module of the package."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition."""


class SingularCurveError(InvalidInputError):
    """Weierstrass model with vanishing discriminant."""


class RankDeficientError(InvalidInputError):
    """Rows that were required to be K-linearly independent are not."""


class OutOfTheoremRangeError(InvalidInputError):
    """Requested rank lies outside the range covered by the height bounds."""


class InconsistentDataError(InvalidInputError):
    """Pairing data that cannot come from a hermitian height pairing."""


class ResourceLimitError(RuntimeError):
    """An enumeration hit its cap before finishing.

    This never means that the object searched for does not exist.
    """

    def __init__(self, message, *, radius=None, partial=None):
        super().__init__(message)
        self.radius = radius
        self.partial = partial
