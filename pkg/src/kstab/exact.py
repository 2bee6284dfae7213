"""Exact rational scalars, polynomials in one variable and linear algebra.

Rationals are :class:`fractions.Fraction`; they are already canonical (lowest
terms, positive denominator) and use Python's arbitrary-precision integers.
Matrices are plain sequences of rows.
"""

from __future__ import annotations

import re
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DuplicateAbscissa, KStabError, SingularMatrix

Rational = Fraction

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def Q(x) -> Fraction:
    """Coerce ints, Fractions and "a/b" strings to a Fraction (floats refused)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not _RATIONAL_RE.match(s):
            raise KStabError(f"malformed rational {x!r}")
        try:
            return Fraction(s)
        except ZeroDivisionError:
            raise KStabError(f"zero denominator in {x!r}") from None
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def format_rational(q: Fraction) -> str:
    q = Q(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(s) -> Fraction:
    """Parse a JSON value: an "a/b" string or an integer (floats are refused)."""
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise KStabError(f"expected a rational string or integer, got {s!r}")
    return Q(s)


@dataclass(frozen=True)
class RationalPolynomial:
    """Dense polynomial; ``coefficients[i]`` multiplies ``k**i``."""

    coefficients: tuple[Fraction, ...] = ()

    def __post_init__(self):
        coeffs = [Q(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coefficients) - 1

    def coefficient(self, i: int) -> Fraction:
        if 0 <= i < len(self.coefficients):
            return self.coefficients[i]
        return Fraction(0)

    def __call__(self, k) -> Fraction:
        k = Q(k)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * k + c
        return acc

    def __add__(self, other: RationalPolynomial) -> RationalPolynomial:
        n = max(len(self.coefficients), len(other.coefficients))
        return RationalPolynomial(
            tuple(self.coefficient(i) + other.coefficient(i) for i in range(n))
        )

    def __mul__(self, other) -> RationalPolynomial:
        if not isinstance(other, RationalPolynomial):
            c = Q(other)
            return RationalPolynomial(tuple(c * a for a in self.coefficients))
        out = [Fraction(0)] * max(len(self.coefficients) + len(other.coefficients) - 1, 0)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return RationalPolynomial(tuple(out))

    __rmul__ = __mul__

    def __str__(self) -> str:
        if not self.coefficients:
            return "0"
        terms = []
        for i in range(len(self.coefficients) - 1, -1, -1):
            c = self.coefficients[i]
            if c == 0:
                continue
            terms.append(f"{format_rational(c)}*k^{i}" if i else format_rational(c))
        return " + ".join(terms)


def interpolate(samples: Iterable[tuple]) -> RationalPolynomial:
    """Unique polynomial of degree < len(samples) through the given points.

    Newton divided differences, exact.
    """
    pts = [(Q(k), Q(v)) for k, v in samples]
    if not pts:
        raise KStabError("interpolation needs at least one sample")
    xs = [k for k, _ in pts]
    if len(set(xs)) != len(xs):
        raise DuplicateAbscissa(f"repeated abscissa among {[format_rational(x) for x in xs]}")
    coef = [v for _, v in pts]
    n = len(pts)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    # expand the Newton form
    poly = RationalPolynomial((coef[-1],))
    for i in range(n - 2, -1, -1):
        poly = poly * RationalPolynomial((-xs[i], Fraction(1))) + RationalPolynomial((coef[i],))
    return poly


# ---------------------------------------------------------------------------
# linear algebra over Q


def mat(rows) -> list[list[Fraction]]:
    return [[Q(x) for x in row] for row in rows]


def mat_vec(a: Sequence[Sequence[Fraction]], x: Sequence[Fraction]) -> list[Fraction]:
    return [sum((aij * xj for aij, xj in zip(row, x)), Fraction(0)) for row in a]


def mat_mul(a, b) -> list[list[Fraction]]:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def transpose(a) -> list[list[Fraction]]:
    return [list(col) for col in zip(*a)]


def dot(x, y) -> Fraction:
    return sum((a * b for a, b in zip(x, y)), Fraction(0))


def quad_form(m, x, y=None) -> Fraction:
    y = x if y is None else y
    return dot(x, mat_vec(m, y))


def _row_reduce(a: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (rref, pivot columns)."""
    a = [list(r) for r in a]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(a) -> int:
    if not a:
        return 0
    return len(_row_reduce(mat(a))[1])


def nullspace(a, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : a x = 0}, one vector per free column."""
    a = mat(a)
    if ncols is None:
        ncols = len(a[0])
    if not a:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    rref, pivots = _row_reduce(a)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, pc in zip(rref, pivots):
            x[pc] = -row[f]
        basis.append(x)
    return basis


def solve_linear(matrix, rhs) -> list[Fraction]:
    """Exact solution of a square nonsingular system.

    Gaussian elimination with partial pivoting on exact nonzero tests: the
    pivot is the first nonzero entry at or below the diagonal.
    """
    a = mat(matrix)
    b = [Q(x) for x in rhs]
    n = len(a)
    if any(len(row) != n for row in a) or len(b) != n:
        raise KStabError("solve_linear needs a square matrix and matching right-hand side")
    aug = [row + [bi] for row, bi in zip(a, b)]
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if p is None:
            raise SingularMatrix(c)
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        for i in range(c + 1, n):
            if aug[i][c] != 0:
                f = aug[i][c] / piv
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = aug[i][n] - sum((aug[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        x[i] = s / aug[i][i]
    return x


def inverse(matrix) -> list[list[Fraction]]:
    n = len(matrix)
    cols = [solve_linear(matrix, [int(i == j) for i in range(n)]) for j in range(n)]
    return transpose(cols)


def det(matrix) -> Fraction:
    a = mat(matrix)
    n = len(a)
    sign = 1
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        d *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return sign * d


def is_positive_definite(m) -> bool:
    """Exact test via symmetric Gaussian elimination (all pivots > 0)."""
    a = mat(m)
    n = len(a)
    for c in range(n):
        if a[c][c] <= 0:
            return False
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return True


def to_decimal(q, places: int = 12) -> str:
    """Fixed-width decimal rendering of an exact rational (round half even)."""
    q = Q(q)
    with localcontext() as ctx:
        ctx.prec = places + max(len(str(abs(q.numerator))), len(str(q.denominator))) + 10
        d = Decimal(q.numerator) / Decimal(q.denominator)
        return format(d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN), "f")
