"""Exception hierarchy.

Every error raised by the library derives from :class:`KStabError`, which is
itself a :class:`ValueError` so callers validating user input can catch either.
"""


class KStabError(ValueError):
    pass


# exact arithmetic
class DuplicateAbscissa(KStabError):
    pass


class SingularMatrix(KStabError):
    def __init__(self, column):
        super().__init__(f"no pivot in column {column}")
        self.column = column


# invariants
class DimensionMismatch(KStabError):
    pass


class NegativeNormSquare(KStabError):
    pass


class ZeroDenominator(KStabError):
    pass


class DegenerateNorm(KStabError):
    pass


class PositiveDF(KStabError):
    pass


# toric
class DegeneratePolytope(KStabError):
    pass


class UnsupportedDimension(KStabError):
    pass


class CreaseMismatch(KStabError):
    pass


class ShiftTooSmall(KStabError):
    pass


class NonPolynomialData(KStabError):
    pass


class NotConvex(KStabError):
    pass


# optimizer
class NoNontrivialDirections(KStabError):
    pass


class DegenerateQ(KStabError):
    pass


class DimensionTooLarge(KStabError):
    pass


class IterationLimit(KStabError):
    """Raised by strict searches; ``best`` holds the uncertified result."""

    def __init__(self, best):
        super().__init__("iteration limit reached before certification")
        self.best = best


# theorem
class InvalidEpsilon(KStabError):
    pass


class NotACandidate(KStabError):
    pass
