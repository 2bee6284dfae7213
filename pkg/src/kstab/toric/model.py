"""Toric test configurations as equivariant models, plus the lattice-sum oracle.

For a PL convex ``f`` on the moment polytope ``P`` and a shift ``R >= max f``,
the generator of the k-th action has eigenvalue ``k (R - f(u/k))`` on the
section indexed by ``u`` in ``kP``.  The leading coefficients of the dimension,
total weight and trace-of-product polynomials are then integrals over P and
its boundary, which :func:`build_model` evaluates exactly.
:func:`discrete_weight_oracle` recomputes them from the lattice sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .. import kernels
from ..errors import KStabError, NonPolynomialData, ShiftTooSmall
from ..exact import Q, format_rational, nullspace, rank
from ..invariants import EquivariantModel, HilbertData, WeightData
from .functions import as_max_affine
from .integrate import (
    crease_decomposition,
    integrate_boundary_on,
    integrate_on,
    integrate_product_on,
)
from .polytope import LatticePolytope, boundary_volume, volume


def max_on(P: LatticePolytope, f) -> Fraction:
    """Maximum of a convex function over P (attained at a vertex)."""
    return max(f(v) for v in P.vertices)


def build_model(P: LatticePolytope, functions: Sequence, shifts: Sequence | None = None,
                labels: Sequence[str] | None = None) -> EquivariantModel:
    fs = [as_max_affine(f) for f in functions]
    if shifts is None:
        shifts = [max_on(P, f) for f in fs]
    shifts = [Q(R) for R in shifts]
    if len(shifts) != len(fs):
        raise KStabError("one shift per function is required")
    for i, (f, R) in enumerate(zip(fs, shifts)):
        top = max_on(P, f)
        if R < top:
            raise ShiftTooSmall(f"shift {format_rational(R)} < max f = {format_rational(top)} for function {i}")
    labels = list(labels) if labels is not None else [f"f{i}" for i in range(len(fs))]

    cells = crease_decomposition(P, fs)
    a0 = volume(P)
    a1 = boundary_volume(P) / 2
    ints = [integrate_on(cells, f) for f in fs]
    bints = [integrate_boundary_on(P, cells, f) for f in fs]
    actions = tuple(
        (labels[i], WeightData(R * a0 - ints[i], R * a1 - bints[i] / 2))
        for i, R in enumerate(shifts)
    )
    m = len(fs)
    d0 = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            fg = integrate_product_on(cells, fs[i], fs[j])
            Ri, Rj = shifts[i], shifts[j]
            d0[i][j] = d0[j][i] = Ri * Rj * a0 - Ri * ints[j] - Rj * ints[i] + fg
    return EquivariantModel(HilbertData(P.dimension, a0, a1), 1, actions, tuple(map(tuple, d0)))


# ---------------------------------------------------------------------------
# discrete oracle


@dataclass(frozen=True)
class OracleFit:
    a0: Fraction
    a1: Fraction
    b0: Fraction
    b1: Fraction
    d0: Fraction | None  # None when the samples cannot determine it
    period: int
    counts: tuple[tuple[int, int, Fraction, Fraction], ...]  # (k, h, w, d)

    def to_json(self) -> dict:
        return {
            "a0": format_rational(self.a0),
            "a1": format_rational(self.a1),
            "b0": format_rational(self.b0),
            "b1": format_rational(self.b1),
            "d0": None if self.d0 is None else format_rational(self.d0),
            "period": self.period,
        }


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _common_denominator(values) -> int:
    d = 1
    for v in values:
        d = _lcm(d, Q(v).denominator)
    return d


def lattice_weight_sums(P: LatticePolytope, f, R, k: int) -> tuple[int, Fraction, Fraction]:
    """Exact ``(h(k), w(k), d(k))``: number of points of kP, sum of eigenvalues
    ``k (R - f(u/k))`` and sum of their squares."""
    f = as_max_affine(f)
    R = Q(R)
    D = _common_denominator([R] + [c for _, c in f.pieces] + [g for grad, _ in f.pieces for g in grad])
    n = P.dimension
    lo = [math.floor(min(v[i] for v in P.vertices) * k) for i in range(n)]
    hi = [math.ceil(max(v[i] for v in P.vertices) * k) for i in range(n)]
    normals = [list(fc.normal) for fc in P.facets]
    rhs = [math.ceil(fc.offset * k) for fc in P.facets]
    # D * k * (R - f(u/k)) = D R k - max_j(D g_j . u + D c_j k), all integers
    grads = [[int(g * D) for g in grad] for grad, _ in f.pieces]
    consts = [int(c * D * k) for _, c in f.pieces]
    shift = int(R * D * k)
    count, s1, s2 = kernels.lattice_sums(lo, hi, normals, rhs, grads, consts, shift)
    return count, Fraction(s1, D), Fraction(s2, D * D)


def _quasi_fit(samples: Sequence[tuple[int, Fraction]], degree: int, period: int, what: str):
    """Leading two coefficients of a quasi-polynomial of the given degree whose
    lower coefficients may depend on ``k mod period``.

    Returns None if the samples do not determine it; raises NonPolynomialData if
    they contradict it.
    """
    lower = max(degree - 1, 0)
    top = min(degree + 1, 2)
    unknowns = top + period * lower

    def row(k):
        r = [Fraction(k) ** (degree - t) for t in range(top)]
        block = [Fraction(0)] * (period * lower)
        for j in range(lower):
            block[(k % period) * lower + j] = Fraction(k) ** j
        return r + block

    rows = [row(k) for k, _ in samples]
    if rank(rows) < unknowns:
        return None
    aug = [r + [-v] for r, (_, v) in zip(rows, samples)]
    ns = nullspace(aug, unknowns + 1)
    sol = [v for v in ns if v[-1] != 0]
    if not sol:
        raise NonPolynomialData(f"{what}: samples are inconsistent with a degree-{degree} "
                                f"quasi-polynomial of period {period}")
    x = [c / sol[0][-1] for c in sol[0][:-1]]
    return x[0], (x[1] if top > 1 else Fraction(0))


def _crease_period(P: LatticePolytope, f) -> int:
    cells = crease_decomposition(P, [f])
    return _common_denominator(c for s in cells for v in s for c in v)


def discrete_weight_oracle(P: LatticePolytope, f, R, k_samples: Sequence[int]) -> OracleFit:
    """Fit leading coefficients to exact lattice sums over ``kP``.

    For integral P and f with integral slopes and lattice creases the sums are
    polynomials in k.  When creases pass through non-lattice points the sums are
    quasi-polynomials whose periodic part sits below the two leading terms; the
    period is then the common denominator of the crease vertices.
    """
    if not P.is_integral:
        raise KStabError("the lattice-sum oracle needs a polytope with integral vertices")
    k_samples = list(k_samples)
    ks = sorted(set(int(k) for k in k_samples))
    if len(ks) != len(k_samples) or any(k < 1 for k in ks):
        raise KStabError("k_samples must be distinct positive integers")
    f = as_max_affine(f)
    R = Q(R)
    if R < max_on(P, f):
        raise ShiftTooSmall(f"shift {format_rational(R)} < max f")
    n = P.dimension
    period = _crease_period(P, f)
    data = [(k,) + lattice_weight_sums(P, f, R, k) for k in ks]
    hfit = _quasi_fit([(k, Fraction(h)) for k, h, _, _ in data], n, 1, "h(k)")
    wfit = _quasi_fit([(k, w) for k, _, w, _ in data], n + 1, period, "w(k)")
    dfit = _quasi_fit([(k, d) for k, _, _, d in data], n + 2, period, "d(k)")
    if hfit is None or wfit is None:
        raise KStabError(f"too few k samples ({len(ks)}) to fit h and w at period {period}")
    # only an overdetermined fit is a check; demand at least one spare sample for h and w
    for deg, per, what in ((n, 1, "h(k)"), (n + 1, period, "w(k)")):
        if len(ks) <= min(deg + 1, 2) + per * max(deg - 1, 0):
            raise KStabError(f"no spare sample to cross-check the {what} fit")
    return OracleFit(hfit[0], hfit[1], wfit[0], wfit[1], None if dfit is None else dfit[0], period,
                     tuple(data))
