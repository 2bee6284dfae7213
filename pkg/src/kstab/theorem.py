"""Optimal directions are relatively semistable: an executable check.

Given a candidate direction ``v`` on an equivariant model, the check rescales
``v`` so that ``DF(v) = -||v||^2``, projects each test direction onto the
orthogonal complement of ``v`` and demands a nonnegative DF there.  A negative
value is not only reported: it is turned into a composed direction ``m v + w``
whose normalized DF strictly beats that of ``v``, with ``m`` taken from
:func:`contradiction_threshold`.

Every comparison is exact.  Inequalities that involve ``||v|| = sqrt(||v||^2)``
are decided by squaring after an explicit sign check (see :func:`_sign_with_root`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import DegenerateNorm, InvalidEpsilon, KStabError, NegativeNormSquare
from .exact import Q, format_rational, to_decimal
from .invariants import (
    DEFAULT_PRECISION,
    Convention,
    EquivariantModel,
    LieAlgebraPoint,
    compare_normalized,
    donaldson_futaki,
    extremal_scaling,
    inner_product,
    norm_squared,
    signed_square,
    sqrt_rational,
)


class Branch(enum.Enum):
    EXTREMAL = "ExtremalBranch"
    SEMISTABLE = "SemistableBranch"
    NOT_A_CANDIDATE = "NotACandidate"


class Verdict(enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    NOT_A_CANDIDATE = "NotACandidate"


# ---------------------------------------------------------------------------
# elementary operations


def orthogonalize(model: EquivariantModel, w: LieAlgebraPoint, v: LieAlgebraPoint,
                  convention=Convention.TRACE_FREE) -> LieAlgebraPoint:
    """``w - (<w,v>/<v,v>) v``, which pairs to zero with ``v``."""
    ns = norm_squared(model, v, convention)
    if ns == 0:
        raise DegenerateNorm("cannot orthogonalize against a direction of zero norm")
    if ns < 0:
        raise NegativeNormSquare(f"norm squared {format_rational(ns)} is negative")
    c = inner_product(model, w, v, convention)
    if c == 0:
        return w
    return w - v * (c / ns)


@dataclass(frozen=True)
class Composition:
    point: LieAlgebraPoint
    df: Fraction
    norm_squared: Fraction


def compose_degenerations(model: EquivariantModel, v: LieAlgebraPoint, v_y: LieAlgebraPoint, m: int,
                          convention=Convention.TRACE_FREE) -> Composition:
    """Numerical data of the direction ``m v + v_y``.

    DF and norm are assembled from the pieces (linearity and the bilinear
    expansion) and then checked against a direct evaluation of the sum.
    """
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise KStabError(f"m must be a positive integer, got {m!r}")
    model.check(v)
    model.check(v_y)
    point = v * m + v_y
    df = m * donaldson_futaki(model, v) + donaldson_futaki(model, v_y)
    ns = (m * m * norm_squared(model, v, convention)
          + 2 * m * inner_product(model, v, v_y, convention)
          + norm_squared(model, v_y, convention))
    if df != donaldson_futaki(model, point) or ns != norm_squared(model, point, convention):
        raise AssertionError("composition identities failed on exact data")
    return Composition(point, df, ns)


# ---------------------------------------------------------------------------
# contradiction threshold


def _sign_with_root(a: Fraction, b: Fraction, c: Fraction) -> int:
    """Exact sign of ``a + b*sqrt(c)`` for rationals with ``c >= 0``."""
    if b == 0 or c == 0:
        return (a > 0) - (a < 0)
    root_sign = 1 if b > 0 else -1
    if a == 0 or (a > 0) == (root_sign > 0):
        return root_sign if a == 0 else (1 if a > 0 else -1)
    # opposite signs: the larger magnitude wins
    diff = a * a - b * b * c
    if diff == 0:
        return 0
    return (1 if a > 0 else -1) if diff > 0 else root_sign


def _least_failing(fails: Callable[[int], bool]) -> int:
    """Least ``m >= 0`` with ``fails(m)``, for a predicate monotone in ``m``."""
    if fails(0):
        return 0
    hi = 1
    while not fails(hi):
        hi *= 2
    lo = hi // 2  # fails(lo) is False
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fails(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class ContradictionCertificate:
    """Threshold ``m0`` past which the composed direction contradicts optimality.

    ``derived_holds(m)`` is the final inequality of the squared chain,
    ``||v_Y||^2 > 2 m eps + eps^2/||v||^2``; it holds below ``m0`` and fails
    from ``m0`` on.  ``variant_thresholds`` gives the thresholds for two other
    right-hand sides, ``2 m eps ||v|| + eps^2/||v||`` and
    ``2 m eps ||v|| + eps^2/||v_Y||``, for comparison only.
    """

    epsilon: Fraction
    v_norm_squared: Fraction
    vy_norm_squared: Fraction
    pairing: Fraction
    threshold: int
    variant_thresholds: dict
    trace: tuple[dict, ...]

    def derived_rhs(self, m: int) -> Fraction:
        return 2 * m * self.epsilon + self.epsilon ** 2 / self.v_norm_squared

    def derived_holds(self, m: int) -> bool:
        return self.vy_norm_squared > self.derived_rhs(m)

    def to_json(self, places: int = 12) -> dict:
        return {
            "epsilon": format_rational(self.epsilon),
            "v_norm_squared": format_rational(self.v_norm_squared),
            "vy_norm_squared": format_rational(self.vy_norm_squared),
            "pairing": format_rational(self.pairing),
            "threshold": self.threshold,
            "variant_thresholds": dict(self.variant_thresholds),
            "trace": list(self.trace),
        }


def _variant_v_holds(N, W, eps, m) -> bool:
    # W > 2 m eps sqrt(N) + eps^2/sqrt(N)  <=>  W sqrt(N) - (2 m eps N + eps^2) > 0
    return _sign_with_root(-(2 * m * eps * N + eps * eps), W, N) > 0


def _variant_vy_holds(N, W, eps, m) -> bool:
    # W > 2 m eps sqrt(N) + eps^2/sqrt(W)  <=>  sqrt(W) (W - 2 m eps sqrt(N)) > eps^2
    if W == 0:
        return False
    if _sign_with_root(W, -2 * m * eps, N) <= 0:
        return False
    # square both (positive) sides: W (W - 2 m eps sqrt N)^2 > eps^4
    a = W ** 3 + 4 * m * m * eps * eps * N * W - eps ** 4
    b = -4 * m * eps * W * W
    return _sign_with_root(a, b, N) > 0


def _trace_step(N, W, eps, m, places) -> dict:
    """Both sides of each step of the chain at one value of ``m``.

    Steps whose sides carry a square root are stored squared, so every entry
    is an exact rational.
    """
    composed = m * m * N + W  # ||v_Y + m v||^2 with <v, v_Y> = 0
    target = m * N + eps  # -(DF of the composed direction) bound
    derived = 2 * m * eps + eps * eps / N
    return {
        "m": m,
        "squaring_precondition": {
            # before squaring: -||v|| ||v_Y + m v|| < -m ||v||^2 - eps, both sides negative
            "lhs_negative": N > 0 and composed > 0,
            "rhs_negative": -target < 0,
        },
        "squared": {
            "lhs": format_rational(N * composed),
            "rhs": format_rational(target * target),
            "holds": N * composed > target * target,
        },
        "rearranged": {
            "lhs": format_rational(W),
            "rhs": format_rational(derived),
            "rhs_approx": to_decimal(derived, places),
            "holds": W > derived,
        },
        "variant_eps2_over_v": {"holds": _variant_v_holds(N, W, eps, m)},
        "variant_eps2_over_vy": {"holds": _variant_vy_holds(N, W, eps, m)},
    }


def contradiction_threshold(v_norm_squared, vy_norm_squared, epsilon, pairing=0,
                            places: int = 12) -> ContradictionCertificate:
    """Least ``m0 >= 0`` with ``||v_Y||^2 <= 2 m0 eps + eps^2/||v||^2``.

    With ``DF(v) = -||v||^2``, ``<v, v_Y> = 0`` and ``DF(v_Y) <= -eps``, the
    composed direction ``m v + v_Y`` has normalized DF at most that of ``v``
    once the inequality above is reached, and strictly less when it is strict.
    """
    N, W, eps = Q(v_norm_squared), Q(vy_norm_squared), Q(epsilon)
    pairing = Q(pairing)
    if eps <= 0:
        raise InvalidEpsilon(f"epsilon must be positive, got {format_rational(eps)}")
    if N <= 0:
        raise DegenerateNorm("the candidate direction must have positive norm")
    if W < 0:
        raise NegativeNormSquare(f"norm squared {format_rational(W)} is negative")
    if pairing != 0:
        raise KStabError("contradiction_threshold assumes <v, v_Y> = 0; orthogonalize first")
    # least integer m >= (W - eps^2/N) / (2 eps)
    m0 = max(0, math.ceil((W - eps * eps / N) / (2 * eps)))
    variants = {
        "eps2_over_v": _least_failing(lambda m: not _variant_v_holds(N, W, eps, m)),
        "eps2_over_vy": _least_failing(lambda m: not _variant_vy_holds(N, W, eps, m)),
    }
    steps = [m for m in (m0 - 1, m0) if m >= 0]
    trace = tuple(_trace_step(N, W, eps, m, places) for m in steps)
    return ContradictionCertificate(eps, N, W, pairing, m0, variants, trace)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class DirectionRecord:
    index: int
    direction: LieAlgebraPoint
    pairing_before: Fraction
    orthogonal: LieAlgebraPoint
    pairing_after: Fraction
    relative_df: Fraction
    passed: bool
    certificate: ContradictionCertificate | None = None
    refutation_m: int | None = None
    composed_signed_square: Fraction | None = None

    def to_json(self, places: int = 12) -> dict:
        out = {
            "index": self.index,
            "direction": self.direction.to_json(),
            "pairing_before": format_rational(self.pairing_before),
            "orthogonal": self.orthogonal.to_json(),
            "pairing_after": format_rational(self.pairing_after),
            "relative_df": {"exact": format_rational(self.relative_df),
                            "approx": to_decimal(self.relative_df, places)},
            "verdict": "Pass" if self.passed else "Fail",
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json(places)
        if self.refutation_m is not None:
            out["refutation"] = {
                "m": self.refutation_m,
                "composed_signed_square": format_rational(self.composed_signed_square),
            }
        return out


@dataclass(frozen=True)
class VerificationReport:
    candidate: LieAlgebraPoint
    branch: Branch
    verdict: Verdict
    scale: Fraction | None
    scaled: LieAlgebraPoint | None
    df: Fraction
    norm_squared: Fraction
    records: tuple[DirectionRecord, ...] = field(default_factory=tuple)
    convention: Convention = Convention.TRACE_FREE

    @property
    def failures(self) -> list[DirectionRecord]:
        return [r for r in self.records if not r.passed]

    def to_json(self, places: int = 12) -> dict:
        out = {
            "candidate": self.candidate.to_json(),
            "branch": self.branch.value,
            "verdict": self.verdict.value,
            "convention": self.convention.value,
            "df": format_rational(self.df),
            "norm_squared": format_rational(self.norm_squared),
            "scale": None if self.scale is None else format_rational(self.scale),
            "scaled_candidate": None if self.scaled is None else self.scaled.to_json(),
            "directions_checked": len(self.records),
            "scope": "finite direction family supplied to the check",
            "directions": [r.to_json(places) for r in self.records],
        }
        if self.scaled is not None and self.norm_squared > 0:
            out["candidate_signed_square"] = format_rational(signed_square(self.df, self.norm_squared))
        return out


def span_directions(model: EquivariantModel) -> list[LieAlgebraPoint]:
    """``+e_i`` and ``-e_i`` for every basis action.

    DF is linear, so it is nonnegative on the orthogonal complement of ``v``
    exactly when it vanishes on the projected basis; checking both signs of
    each basis vector makes the finite check complete on the model's span.
    """
    out = []
    for i in range(model.size):
        e = model.basis(i)
        out.extend([e, -e])
    return out


def _refute(model, scaled, w, df_w, convention) -> tuple[ContradictionCertificate | None, int, Fraction]:
    N = norm_squared(model, scaled, convention)
    W = norm_squared(model, w, convention)
    df_v = donaldson_futaki(model, scaled)
    if df_v == 0:
        # DF(m v + w) = DF(w) < 0 = DF(v) for every m, so m = 1 already wins
        cert, m = None, 1
    else:
        cert = contradiction_threshold(N, W, -df_w, inner_product(model, scaled, w, convention))
        # the threshold may be 0, and at equality the composition only ties
        m = max(1, cert.threshold)
        if not W < cert.derived_rhs(m):
            m += 1
    comp = compose_degenerations(model, scaled, w, m, convention)
    if compare_normalized(comp.df, comp.norm_squared, df_v, N) >= 0:
        raise AssertionError("refutation did not beat the candidate")
    return cert, m, signed_square(comp.df, comp.norm_squared)


def verify_relative_semistability(model: EquivariantModel, v: LieAlgebraPoint,
                                  directions: Sequence[LieAlgebraPoint] | str = "span",
                                  convention=Convention.TRACE_FREE) -> VerificationReport:
    """Check ``DF >= 0`` on the ``v``-orthogonal parts of the given directions.

    A candidate with ``DF(v) > 0`` yields a report with verdict NotACandidate
    rather than an exception, so callers always receive a report.
    """
    conv = Convention(convention) if not isinstance(convention, Convention) else convention
    model.check(v)
    ns = norm_squared(model, v, conv)
    if ns == 0:
        raise DegenerateNorm("the candidate direction has zero norm")
    if ns < 0:
        raise NegativeNormSquare(f"norm squared {format_rational(ns)} is negative")
    df = donaldson_futaki(model, v)
    if df > 0:
        return VerificationReport(v, Branch.NOT_A_CANDIDATE, Verdict.NOT_A_CANDIDATE, None, None, df, ns,
                                  (), conv)
    scaling = extremal_scaling(model, v, conv)
    scaled = scaling.point
    branch = Branch.SEMISTABLE if scaling.semistable_branch else Branch.EXTREMAL
    if isinstance(directions, str):
        if directions != "span":
            raise KStabError(f"unknown direction family {directions!r}")
        directions = span_directions(model)

    records = []
    for i, w in enumerate(directions):
        model.check(w)
        before = inner_product(model, w, scaled, conv)
        u = orthogonalize(model, w, scaled, conv)
        after = inner_product(model, u, scaled, conv)
        if after != 0:
            raise AssertionError("orthogonalization left a nonzero pairing")
        value = donaldson_futaki(model, u)
        if value >= 0:
            records.append(DirectionRecord(i, w, before, u, after, value, True))
            continue
        cert, m, sq = _refute(model, scaled, u, value, conv)
        records.append(DirectionRecord(i, w, before, u, after, value, False, cert, m, sq))
    verdict = Verdict.PASS if all(r.passed for r in records) else Verdict.FAIL
    return VerificationReport(v, branch, verdict, scaling.scale, scaled, df, ns, tuple(records), conv)


# ---------------------------------------------------------------------------


def calabi_lower_bound(search_result) -> Fraction:
    """Square of the lower bound on the Calabi functional given by a search.

    The bound is ``-min DF/||.||`` when that minimum is negative and 0
    otherwise; it only concerns the family that was searched.
    """
    value = search_result.value_squared_signed
    if value is None or value >= 0:
        return Fraction(0)
    return -value


def calabi_bound_json(search_result, precision=DEFAULT_PRECISION, places: int = 12) -> dict:
    sq = calabi_lower_bound(search_result)
    return {
        "bound_squared": format_rational(sq),
        "approx": to_decimal(sqrt_rational(sq, precision), places),
        "scope": "searched family only",
    }
