"""Numerical invariants of test configurations over an equivariant model.

An :class:`EquivariantModel` stores, for a finite family of commuting actions on
one central fibre, the leading Hilbert coefficients ``(a0, a1)``, each action's
leading weight coefficients ``(b0, b1)`` and the matrix ``d0`` of leading
coefficients of ``tr(A_k B_k)``.  Every quantity below is evaluated on a
rational combination of the actions (a :class:`LieAlgebraPoint`): weights are
linear in the coefficients, pairings bilinear.

Weight data is stored already divided by the exponent ``r``, so the exponent
never enters a formula; ``exponent_r`` is kept for provenance only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    DegenerateNorm,
    DimensionMismatch,
    KStabError,
    NegativeNormSquare,
    PositiveDF,
    ZeroDenominator,
)
from .exact import Q, format_rational, parse_rational, to_decimal

DEFAULT_PRECISION = Fraction(1, 10**9)


class Convention(enum.Enum):
    """Which inner product to use.

    ``TRACE_FREE`` is ``d0(v,w) - b0(v) b0(w) / a0``, under which constant
    twists are null.  ``PAPER`` is the literal ``(d0(v,w) - b0(v) b0(w)) / a0``.
    """

    TRACE_FREE = "trace-free"
    PAPER = "paper"


@dataclass(frozen=True)
class HilbertData:
    n: int
    a0: Fraction
    a1: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a0", Q(self.a0))
        object.__setattr__(self, "a1", Q(self.a1))
        if self.n < 0:
            raise KStabError("dimension must be nonnegative")
        if self.a0 <= 0:
            raise KStabError("leading Hilbert coefficient a0 must be positive")


@dataclass(frozen=True)
class WeightData:
    b0: Fraction
    b1: Fraction

    def __post_init__(self):
        object.__setattr__(self, "b0", Q(self.b0))
        object.__setattr__(self, "b1", Q(self.b1))


@dataclass(frozen=True)
class LieAlgebraPoint:
    """Rational coefficient vector over a model's actions."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(Q(c) for c in self.coefficients))

    @classmethod
    def of(cls, *coefficients) -> LieAlgebraPoint:
        return cls(tuple(coefficients))

    @classmethod
    def basis(cls, size: int, i: int) -> LieAlgebraPoint:
        return cls(tuple(Fraction(int(j == i)) for j in range(size)))

    @classmethod
    def zero(cls, size: int) -> LieAlgebraPoint:
        return cls((Fraction(0),) * size)

    def __len__(self):
        return len(self.coefficients)

    def __iter__(self):
        return iter(self.coefficients)

    def __getitem__(self, i):
        return self.coefficients[i]

    def _check(self, other: LieAlgebraPoint):
        if len(other) != len(self):
            raise DimensionMismatch(f"points of length {len(self)} and {len(other)}")

    def __add__(self, other: LieAlgebraPoint) -> LieAlgebraPoint:
        self._check(other)
        return LieAlgebraPoint(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: LieAlgebraPoint) -> LieAlgebraPoint:
        self._check(other)
        return LieAlgebraPoint(tuple(a - b for a, b in zip(self, other)))

    def __neg__(self) -> LieAlgebraPoint:
        return LieAlgebraPoint(tuple(-a for a in self))

    def __mul__(self, scalar) -> LieAlgebraPoint:
        c = Q(scalar)
        return LieAlgebraPoint(tuple(c * a for a in self))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    def to_json(self) -> list[str]:
        return [format_rational(c) for c in self.coefficients]


@dataclass(frozen=True)
class EquivariantModel:
    hilbert: HilbertData
    exponent_r: int
    actions: tuple[tuple[str, WeightData], ...]
    d0: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        d0 = tuple(tuple(Q(x) for x in row) for row in self.d0)
        object.__setattr__(self, "d0", d0)
        object.__setattr__(self, "actions", tuple((str(l), w) for l, w in self.actions))
        m = len(self.actions)
        if self.exponent_r < 1:
            raise KStabError("exponent r must be a positive integer")
        if len(d0) != m or any(len(row) != m for row in d0):
            raise DimensionMismatch(f"d0 must be {m}x{m}")
        for i in range(m):
            for j in range(i):
                if d0[i][j] != d0[j][i]:
                    raise KStabError(f"d0 is not symmetric at ({i},{j})")
        a0 = self.hilbert.a0
        for i, (label, w) in enumerate(self.actions):
            if d0[i][i] - w.b0 * w.b0 / a0 < 0:
                raise KStabError(f"action {label!r} has negative trace-free norm")

    @property
    def size(self) -> int:
        return len(self.actions)

    @property
    def labels(self) -> list[str]:
        return [l for l, _ in self.actions]

    def point(self, *coefficients) -> LieAlgebraPoint:
        v = LieAlgebraPoint(tuple(coefficients))
        self.check(v)
        return v

    def basis(self, i: int) -> LieAlgebraPoint:
        return LieAlgebraPoint.basis(self.size, i)

    def check(self, v: LieAlgebraPoint):
        if len(v) != self.size:
            raise DimensionMismatch(f"point has {len(v)} coefficients, model has {self.size} actions")

    def weights(self, v: LieAlgebraPoint) -> WeightData:
        """Weight data of the combination ``v`` of the actions."""
        self.check(v)
        b0 = sum((c * w.b0 for c, (_, w) in zip(v, self.actions)), Fraction(0))
        b1 = sum((c * w.b1 for c, (_, w) in zip(v, self.actions)), Fraction(0))
        return WeightData(b0, b1)

    def pairing(self, v: LieAlgebraPoint, w: LieAlgebraPoint) -> Fraction:
        """Bilinear extension of d0."""
        self.check(v)
        self.check(w)
        return sum(
            (v[i] * w[j] * self.d0[i][j] for i in range(self.size) for j in range(self.size)
             if v[i] and w[j]),
            Fraction(0),
        )

    # --- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n": self.hilbert.n,
            "r": self.exponent_r,
            "a0": format_rational(self.hilbert.a0),
            "a1": format_rational(self.hilbert.a1),
            "actions": [
                {"label": l, "b0": format_rational(w.b0), "b1": format_rational(w.b1)}
                for l, w in self.actions
            ],
            "d0": [[format_rational(x) for x in row] for row in self.d0],
        }

    @classmethod
    def from_json(cls, doc: dict) -> EquivariantModel:
        try:
            hilbert = HilbertData(int(doc["n"]), parse_rational(doc["a0"]), parse_rational(doc["a1"]))
            actions = tuple(
                (a["label"], WeightData(parse_rational(a["b0"]), parse_rational(a["b1"])))
                for a in doc["actions"]
            )
            d0 = tuple(tuple(parse_rational(x) for x in row) for row in doc["d0"])
            r = int(doc.get("r", 1))
        except KeyError as e:
            raise KStabError(f"model JSON is missing field {e.args[0]!r}") from None
        except TypeError as e:
            raise KStabError(f"model JSON has a malformed field: {e}") from None
        return cls(hilbert, r, actions, d0)


def _conv(convention) -> Convention:
    return convention if isinstance(convention, Convention) else Convention(convention)


def donaldson_futaki(model: EquivariantModel, v: LieAlgebraPoint) -> Fraction:
    h = model.hilbert
    w = model.weights(v)
    return (w.b0 * h.a1 - w.b1 * h.a0) / h.a0


def futaki_vector(model: EquivariantModel) -> list[Fraction]:
    return [donaldson_futaki(model, model.basis(i)) for i in range(model.size)]


def inner_product(model, v, w, convention=Convention.TRACE_FREE) -> Fraction:
    a0 = model.hilbert.a0
    b0v = model.weights(v).b0
    b0w = model.weights(w).b0
    d = model.pairing(v, w)
    if _conv(convention) is Convention.TRACE_FREE:
        return d - b0v * b0w / a0
    return (d - b0v * b0w) / a0


def gram_matrix(model, convention=Convention.TRACE_FREE) -> list[list[Fraction]]:
    e = [model.basis(i) for i in range(model.size)]
    return [[inner_product(model, a, b, convention) for b in e] for a in e]


def norm_squared(model, v, convention=Convention.TRACE_FREE) -> Fraction:
    return inner_product(model, v, v, convention)


def sqrt_rational(x, precision=DEFAULT_PRECISION) -> Fraction:
    """Rational ``q`` with ``q <= sqrt(x) < q + precision``; exact on perfect squares.

    The bracket comes from the integer square root of ``x`` scaled by a power
    of two, so both bounds are certified.
    """
    x = Q(x)
    precision = Q(precision)
    if precision <= 0:
        raise KStabError("precision must be positive")
    if x < 0:
        raise NegativeNormSquare(f"square root of negative value {format_rational(x)}")
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    scale = 1
    while Fraction(1, scale) >= precision:
        scale *= 2
    lo = math.isqrt(x.numerator * scale * scale // x.denominator)
    return Fraction(lo, scale)


def l2_norm(model, v, precision=DEFAULT_PRECISION, convention=Convention.TRACE_FREE) -> Fraction:
    ns = norm_squared(model, v, convention)
    if ns < 0:
        raise NegativeNormSquare(
            f"norm squared {format_rational(ns)} is negative under the {_conv(convention).value} convention"
        )
    return sqrt_rational(ns, precision)


def compose(model, v, w, m) -> LieAlgebraPoint:
    """The point ``m*v + w``."""
    model.check(v)
    model.check(w)
    return v * Q(m) + w


def relative_df(model, alpha, beta, convention=Convention.TRACE_FREE) -> Fraction:
    """DF of ``alpha`` corrected by its pairing with the background action ``beta``.

    Trace-free convention projects along ``beta`` (denominator <beta,beta>);
    the paper convention uses its own inner product and the denominator <alpha,alpha>.
    """
    conv = _conv(convention)
    ab = inner_product(model, alpha, beta, conv)
    df = donaldson_futaki(model, alpha)
    if ab == 0:
        return df
    denom = inner_product(model, *((beta, beta) if conv is Convention.TRACE_FREE else (alpha, alpha)), conv)
    if denom == 0:
        raise ZeroDenominator("relative DF denominator pairing vanishes while <alpha,beta> != 0")
    return df - ab / denom * donaldson_futaki(model, beta)


@dataclass(frozen=True)
class ExtremalScaling:
    point: LieAlgebraPoint
    scale: Fraction
    semistable_branch: bool


def extremal_scaling(model, v, convention=Convention.TRACE_FREE) -> ExtremalScaling:
    """Rescale ``v`` so that ``DF(v) = -||v||^2``; DF(v) = 0 is left untouched."""
    ns = norm_squared(model, v, convention)
    if ns == 0:
        raise DegenerateNorm("cannot scale a direction of zero norm")
    if ns < 0:
        raise NegativeNormSquare(f"norm squared {format_rational(ns)} is negative")
    df = donaldson_futaki(model, v)
    if df > 0:
        raise PositiveDF(f"DF = {format_rational(df)} > 0; not an optimal-degeneration candidate")
    if df == 0:
        return ExtremalScaling(v, Fraction(1), True)
    c = -df / ns
    return ExtremalScaling(v * c, c, False)


@dataclass(frozen=True)
class NormalizedDF:
    """``sign(DF) * DF^2 / ||v||^2`` plus a decimal rendering of ``DF/||v||``."""

    signed_square: Fraction
    approx: Fraction

    @property
    def sign(self) -> int:
        return (self.signed_square > 0) - (self.signed_square < 0)


def signed_square(df, ns) -> Fraction:
    if ns <= 0:
        raise DegenerateNorm("normalized DF needs a positive norm")
    s = df * df / ns
    return s if df >= 0 else -s


def normalized_value(signed_sq, precision=DEFAULT_PRECISION) -> Fraction:
    root = sqrt_rational(abs(signed_sq), precision)
    return root if signed_sq >= 0 else -root


def normalized_df(model, v, precision=DEFAULT_PRECISION, convention=Convention.TRACE_FREE) -> NormalizedDF:
    ns = norm_squared(model, v, convention)
    if ns <= 0:
        raise DegenerateNorm(f"norm squared {format_rational(ns)} is not positive")
    ss = signed_square(donaldson_futaki(model, v), ns)
    return NormalizedDF(ss, normalized_value(ss, precision))


def compare_normalized(df1, ns1, df2, ns2) -> int:
    """Sign of ``df1/sqrt(ns1) - df2/sqrt(ns2)`` without square roots."""
    a, b = signed_square(df1, ns1), signed_square(df2, ns2)
    return (a > b) - (a < b)


def synthetic_model(futaki: Sequence, gram: Sequence[Sequence], b0: Sequence | None = None,
                    a0=1, a1=1, n: int = 1, labels: Sequence[str] | None = None) -> EquivariantModel:
    """Model whose Futaki vector and trace-free Gram matrix are prescribed.

    ``b0`` defaults to zero, which makes the trace-free and paper inner
    products coincide when ``a0 = 1``.
    """
    f = [Q(x) for x in futaki]
    g = [[Q(x) for x in row] for row in gram]
    m = len(f)
    b0 = [Fraction(0)] * m if b0 is None else [Q(x) for x in b0]
    a0, a1 = Q(a0), Q(a1)
    labels = list(labels) if labels is not None else [f"v{i}" for i in range(m)]
    # DF_i = (b0_i a1 - b1_i a0)/a0  =>  b1_i = (b0_i a1 - DF_i a0)/a0
    actions = tuple(
        (labels[i], WeightData(b0[i], (b0[i] * a1 - f[i] * a0) / a0)) for i in range(m)
    )
    d0 = tuple(tuple(g[i][j] + b0[i] * b0[j] / a0 for j in range(m)) for i in range(m))
    return EquivariantModel(HilbertData(n, a0, a1), 1, actions, d0)


def describe(model, v, precision=DEFAULT_PRECISION, convention=Convention.TRACE_FREE, places=12) -> dict:
    """JSON-ready summary of the invariants of one point."""
    conv = _conv(convention)
    w = model.weights(v)
    df = donaldson_futaki(model, v)
    ns = norm_squared(model, v, conv)
    out = {
        "b0": format_rational(w.b0),
        "b1": format_rational(w.b1),
        "df": {"exact": format_rational(df), "approx": to_decimal(df, places)},
        "norm_squared": {"exact": format_rational(ns), "approx": to_decimal(ns, places)},
    }
    if ns >= 0:
        out["l2_norm"] = {"approx": to_decimal(sqrt_rational(ns, precision), places)}
    if ns > 0:
        nd = normalized_df(model, v, precision, conv)
        out["normalized_df"] = {
            "signed_square": format_rational(nd.signed_square),
            "approx": to_decimal(nd.approx, places),
        }
    return out
