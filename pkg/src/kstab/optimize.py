"""Search for an optimal degeneration among PL convex functions on a fixed triangulation.

The normalized DF invariant ``DF(f) / ||f||`` is minimized over node-value
vectors satisfying the second-difference (convexity) constraints.  DF is a
linear form ``L`` and ``||.||^2`` a quadratic form ``Q``, so the problem is

    minimize  L.y / sqrt(y'Qy)   subject to  A y >= 0,  y != 0

in coordinates ``y`` on a chosen complement of the null directions.

If some feasible ``y`` has ``L.y < 0`` the minimizer is the Q-projection of
``u = -Q^{-1} L`` onto the cone, found by an exact primal active-set QP.  If
the projection is zero, ``L >= 0`` on the cone and the minimum is attained on an
extreme ray (or is 0 on a lineality direction); rays are stationary points of
working sets of ``dim - 1`` constraints and are enumerated exactly.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DegenerateQ, DimensionTooLarge, IterationLimit, KStabError, NoNontrivialDirections
from .exact import (
    dot,
    format_rational,
    is_positive_definite,
    mat_vec,
    nullspace,
    quad_form,
    rank,
    solve_linear,
    to_decimal,
    transpose,
)
from .invariants import DEFAULT_PRECISION, normalized_value, signed_square
from .toric.functions import second_differences
from .toric.integrate import boundary_cells
from .toric.polytope import (
    LatticePolytope,
    Triangulation,
    affine_rank,
    boundary_volume,
    facet_measure,
    primitive,
    simplex_volume,
    volume,
)

BRUTE_FORCE_MAX_DIM = 4


class Directions(enum.Enum):
    """Which complement of the null directions to search.

    NONAFFINE pins the function to zero at the lexicographically first
    affinely independent nodes, which removes all affine functions.  AFFINE
    searches affine functions modulo constants (product configurations).  FULL
    pins a single node, removing only constants.
    """

    NONAFFINE = "nonaffine"
    AFFINE = "affine"
    FULL = "full"


class Status(enum.Enum):
    DESTABILIZER = "Destabilizer"
    STABLE = "Stable"
    BOUNDARY_DEGENERATE = "BoundaryDegenerate"


@dataclass(frozen=True)
class SearchSpace:
    polytope: LatticePolytope
    triangulation: Triangulation
    directions: Directions
    objective: tuple[Fraction, ...]  # L on node values
    norm_form: tuple[tuple[Fraction, ...], ...]  # Q on node values
    convexity: tuple[tuple[int, ...], ...]  # A on node values
    affine_kernel: tuple[tuple[Fraction, ...], ...]  # constant, then x_1..x_n
    basis: tuple[tuple[Fraction, ...], ...]  # search directions as node-value vectors
    pinned: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def lift(self, y: Sequence[Fraction]) -> list[Fraction]:
        """Node values of the reduced coordinate vector ``y``."""
        out = [Fraction(0)] * len(self.triangulation.nodes)
        for c, b in zip(y, self.basis):
            if c:
                for i, bi in enumerate(b):
                    out[i] += c * bi
        return out

    @property
    def reduced_objective(self) -> list[Fraction]:
        return [dot(self.objective, b) for b in self.basis]

    @property
    def reduced_norm(self) -> list[list[Fraction]]:
        qb = [mat_vec(self.norm_form, b) for b in self.basis]
        return [[dot(a, q) for q in qb] for a in self.basis]

    @property
    def reduced_constraints(self) -> list[list[Fraction]]:
        rows = []
        seen = set()
        for a in self.convexity:
            r = [dot(a, b) for b in self.basis]
            if any(r):
                key = primitive(r)
                if key not in seen:
                    seen.add(key)
                    rows.append([Fraction(x) for x in key])
        return rows

    def df(self, x: Sequence[Fraction]) -> Fraction:
        return dot(self.objective, x)

    def norm_squared(self, x: Sequence[Fraction]) -> Fraction:
        return quad_form(self.norm_form, x)

    def is_convex(self, x: Sequence[Fraction]) -> bool:
        return all(dot(a, x) >= 0 for a in self.convexity)


def _pinned_nodes(T: Triangulation, count: int) -> list[int]:
    order = sorted(range(len(T.nodes)), key=lambda i: T.nodes[i])
    chosen: list[int] = []
    for i in order:
        trial = chosen + [i]
        if affine_rank([T.nodes[j] for j in trial]) == len(trial) - 1:
            chosen = trial
            if len(chosen) == count:
                break
    return chosen


def build_search_space(P: LatticePolytope, T: Triangulation, directions=Directions.NONAFFINE) -> SearchSpace:
    """Assemble DF, norm and convexity forms for hat functions on ``T``."""
    directions = Directions(directions) if not isinstance(directions, Directions) else directions
    n = P.dimension
    if T.dimension != n:
        raise KStabError("triangulation and polytope dimensions differ")
    if any(not P.contains(x) for x in T.nodes):
        raise KStabError("triangulation has nodes outside the polytope")
    cells = [T.simplex_points(s) for s in T.simplices]
    vol = volume(P)
    if sum((simplex_volume(c) for c in cells), Fraction(0)) != vol:
        raise KStabError("triangulation does not cover the polytope")
    a0, a1 = vol, boundary_volume(P) / 2

    N = len(T.nodes)
    ints = [Fraction(0)] * N
    mass = [[Fraction(0)] * N for _ in range(N)]
    for s, pts in zip(T.simplices, cells):
        v = simplex_volume(pts)
        for i in s:
            ints[i] += v / (n + 1)
            for j in s:
                mass[i][j] += v * (2 if i == j else 1) / ((n + 1) * (n + 2))
    bints = [Fraction(0)] * N
    index = {p: i for i, p in enumerate(T.nodes)}
    for face, normal in boundary_cells(P, cells):
        m = facet_measure(face, normal)
        for p in face:
            bints[index[p]] += m / n
    # DF(f) = 1/2 int_boundary f - (a1/a0) int f ;  ||f||^2 = int f^2 - (int f)^2 / a0
    L = tuple(bints[i] / 2 - a1 / a0 * ints[i] for i in range(N))
    Qf = tuple(tuple(mass[i][j] - ints[i] * ints[j] / a0 for j in range(N)) for i in range(N))
    A = tuple(second_differences(T))
    kernel = [tuple(Fraction(1) for _ in range(N))] + [tuple(x[d] for x in T.nodes) for d in range(n)]

    if directions is Directions.AFFINE:
        basis = [list(k) for k in kernel[1:]]
        pinned: list[int] = []
    else:
        pinned = _pinned_nodes(T, n + 1 if directions is Directions.NONAFFINE else 1)
        free = [i for i in range(N) if i not in pinned]
        basis = [[Fraction(int(i == j)) for i in range(N)] for j in free]
    if not basis:
        raise NoNontrivialDirections("every feasible function is affine on this triangulation")
    space = SearchSpace(P, T, directions, L, Qf, A, tuple(kernel), tuple(map(tuple, basis)), tuple(pinned))
    if not is_positive_definite(space.reduced_norm):
        raise DegenerateQ("norm form is not positive definite on the search complement")
    return space


# ---------------------------------------------------------------------------
# results


@dataclass
class SearchResult:
    minimizer: tuple[Fraction, ...] | None  # node values
    coordinates: tuple[Fraction, ...] | None  # reduced coordinates
    df: Fraction | None
    norm_squared: Fraction | None
    value_squared_signed: Fraction | None
    status: Status
    certified: bool
    certificate: dict = field(default_factory=dict)
    iterations: int = 0
    method: str = "active-set"

    def value_approx(self, precision=DEFAULT_PRECISION) -> Fraction | None:
        if self.value_squared_signed is None:
            return None
        return normalized_value(self.value_squared_signed, precision)

    def to_json(self, precision=DEFAULT_PRECISION, places: int = 12) -> dict:
        fmt = lambda v: None if v is None else [format_rational(x) for x in v]
        out = {
            "method": self.method,
            "status": self.status.value,
            "certified": self.certified,
            "iterations": self.iterations,
            "minimizer": fmt(self.minimizer),
            "coordinates": fmt(self.coordinates),
            "df": None if self.df is None else format_rational(self.df),
            "norm_squared": None if self.norm_squared is None else format_rational(self.norm_squared),
            "value_squared_signed": None if self.value_squared_signed is None
            else format_rational(self.value_squared_signed),
            "value_approx": None if self.value_squared_signed is None
            else to_decimal(self.value_approx(precision), places),
        }
        if self.certificate:
            out["certificate"] = self.certificate
        return out


def canonical(x: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Positive rescaling making the first nonzero coordinate +1 or -1."""
    lead = next((c for c in x if c), None)
    if lead is None:
        return tuple(x)
    s = abs(lead)
    return tuple(c / s for c in x)


def _better(candidate: tuple, incumbent: tuple | None) -> bool:
    """Candidates are (signed_square, canonical node vector); lower wins, ties lexicographic."""
    return incumbent is None or candidate < incumbent


def _result(space: SearchSpace, y, status_hint_certified: bool, certificate: dict, iterations: int,
            method: str = "active-set") -> SearchResult:
    y = canonical(y)
    x = tuple(space.lift(y))
    df = space.df(x)
    ns = space.norm_squared(x)
    ss = signed_square(df, ns)
    if df < 0:
        status = Status.DESTABILIZER
    elif status_hint_certified:
        status = Status.STABLE
    else:
        status = Status.BOUNDARY_DEGENERATE
    return SearchResult(canonical(x), y, df, ns, ss, status, status_hint_certified, certificate, iterations, method)


def _identity(d: int) -> list[list[Fraction]]:
    return [[Fraction(int(i == j)) for i in range(d)] for j in range(d)]


def _projected_gradient(L, Qr, A_w, y) -> list[Fraction]:
    """Gradient of L.y/||y|| restricted to the working-set null space (zero at stationary points)."""
    Qy = mat_vec(Qr, y)
    ratio = dot(L, y) / dot(y, Qy)
    g = [l - ratio * q for l, q in zip(L, Qy)]
    Z = nullspace(A_w, len(y)) if A_w else _identity(len(y))
    return [dot(z, g) for z in Z]


def _project_to_cone(Qr, A, u, max_iterations, rng) -> tuple[list[Fraction], list[int], list[Fraction], int, bool]:
    """Primal active-set QP: minimize (y-u)'Q(y-u)/2 subject to A y >= 0, from y = 0."""
    d = len(u)
    y = [Fraction(0)] * d
    W: list[int] = []
    order = list(range(len(A)))
    rng.shuffle(order)
    rankpos = {i: r for r, i in enumerate(order)}
    for it in range(1, max_iterations + 1):
        g = mat_vec(Qr, [a - b for a, b in zip(y, u)])
        Aw = [A[i] for i in W]
        Z = nullspace(Aw, d) if Aw else _identity(d)
        if Z:
            H = [[quad_form(Qr, a, b) for b in Z] for a in Z]
            z = solve_linear(H, [-dot(a, g) for a in Z])
            p = [sum((zi * Zi[k] for zi, Zi in zip(z, Z)), Fraction(0)) for k in range(d)]
        else:
            p = [Fraction(0)] * d
        if not any(p):
            # multipliers: A_W' lam = Q p + g = g
            if W:
                AAt = [[dot(a, b) for b in Aw] for a in Aw]
                lam = solve_linear(AAt, mat_vec(Aw, g))
            else:
                lam = []
            if all(l >= 0 for l in lam):
                return y, W, lam, it, True
            worst = min(lam)
            drop = min((i for i, l in zip(W, lam) if l == worst), key=lambda i: rankpos[i])
            W.remove(drop)
            continue
        alpha = Fraction(1)
        blocking = None
        for i in range(len(A)):
            if i in W:
                continue
            ap = dot(A[i], p)
            if ap < 0:
                step = -dot(A[i], y) / ap
                if step < alpha or (step == alpha and blocking is not None and rankpos[i] < rankpos[blocking]):
                    alpha, blocking = step, i
        y = [a + alpha * b for a, b in zip(y, p)]
        if blocking is not None:
            W.append(blocking)
    return y, W, [], max_iterations, False


def _extreme_rays(A, d, max_count):
    """Extreme rays of the pointed cone {y : A y >= 0}, with the constraints defining each."""
    rays = []
    examined = 0
    for combo in itertools.combinations(range(len(A)), d - 1):
        examined += 1
        if examined > max_count:
            return rays, examined, False
        rows = [A[i] for i in combo]
        ns = nullspace(rows, d) if rows else _identity(d)
        if len(ns) != 1:
            continue
        r = ns[0]
        for cand in (r, [-c for c in r]):
            if all(dot(a, cand) >= 0 for a in A):
                rays.append((canonical(cand), list(combo)))
                break
    return rays, examined, True


def minimize_normalized_df(space: SearchSpace, max_iterations: int = 1000, seed: int = 0,
                           strict: bool = False) -> SearchResult:
    """Minimize DF/||.|| over the convex cone of the search space.

    ``seed`` only permutes the order in which tied constraints are considered;
    the returned minimizer is canonical and does not depend on it.
    """
    rng = random.Random(seed)
    L = space.reduced_objective
    Qr = space.reduced_norm
    A = space.reduced_constraints
    d = space.dimension

    u = [-c for c in solve_linear(Qr, L)]
    y, W, lam, iters, ok = _project_to_cone(Qr, A, u, max_iterations, rng)
    if not ok:
        if any(y) and dot(L, y) < 0:
            res = _result(space, y, False, {"phase": "projection", "working_set": W}, iters)
        else:
            res = SearchResult(None, None, None, None, None, Status.BOUNDARY_DEGENERATE, False,
                               {"phase": "projection"}, iters)
        if strict:
            raise IterationLimit(res)
        return res
    if any(y):
        Aw = [A[i] for i in W]
        cert = {
            "phase": "projection",
            "active_constraints": [[format_rational(c) for c in A[i]] for i in sorted(W)],
            "multipliers": [format_rational(l) for _, l in sorted(zip(W, lam))],
            "stationarity_residual": [format_rational(r) for r in _projected_gradient(L, Qr, Aw, y)],
        }
        return _result(space, y, True, cert, iters)

    # L >= 0 on the cone: the minimum is 0 on a lineality direction or sits on an extreme ray
    lineality = nullspace(A, d) if A else _identity(d)
    if lineality:
        best = None
        for v in lineality:
            for cand in (v, [-c for c in v]):
                x = canonical(space.lift(canonical(cand)))
                key = (signed_square(space.df(x), space.norm_squared(x)), x)
                if _better(key, best):
                    best, best_y = key, canonical(cand)
        cert = {"phase": "lineality", "active_constraints": [[format_rational(c) for c in a] for a in A],
                "stationarity_residual": [format_rational(r) for r in _projected_gradient(L, Qr, A, best_y)]}
        return _result(space, best_y, True, cert, iters)

    rays, examined, complete = _extreme_rays(A, d, max(max_iterations - iters, 1))
    best = None
    best_ray = None
    for r, combo in rays:
        x = canonical(space.lift(r))
        key = (signed_square(space.df(x), space.norm_squared(x)), x)
        if _better(key, best):
            best, best_ray = key, (r, combo)
    if best_ray is None:
        if complete:
            raise NoNontrivialDirections("the convexity cone contains no nonzero direction")
        res = SearchResult(None, None, None, None, None, Status.BOUNDARY_DEGENERATE, False,
                           {"phase": "extreme-rays"}, iters + examined)
        if strict:
            raise IterationLimit(res)
        return res
    r, combo = best_ray
    Aw = [A[i] for i in combo]
    cert = {
        "phase": "extreme-rays",
        "active_constraints": [[format_rational(c) for c in a] for a in Aw],
        "rays_examined": len(rays),
        "stationarity_residual": [format_rational(x) for x in _projected_gradient(L, Qr, Aw, r)],
    }
    res = _result(space, r, complete, cert, iters + examined)
    if strict and not complete:
        raise IterationLimit(res)
    return res


def brute_force_search(space: SearchSpace, resolution: int) -> SearchResult:
    """Best integer direction in ``[-resolution, resolution]^dim`` satisfying the
    convexity constraints; an oracle independent of the active-set solver."""
    d = space.dimension
    if d > BRUTE_FORCE_MAX_DIM:
        raise DimensionTooLarge(f"brute force is capped at dimension {BRUTE_FORCE_MAX_DIM}, got {d}")
    if resolution < 1:
        raise KStabError("resolution must be a positive integer")
    L = space.reduced_objective
    Qr = space.reduced_norm
    A = space.reduced_constraints
    best = None
    best_y = None
    evaluated = 0
    for y in itertools.product(range(-resolution, resolution + 1), repeat=d):
        if not any(y):
            continue
        y = [Fraction(c) for c in y]
        if any(dot(a, y) < 0 for a in A):
            continue
        evaluated += 1
        x = canonical(space.lift(y))
        key = (signed_square(dot(L, y), quad_form(Qr, y)), x)
        if _better(key, best):
            best, best_y = key, y
    if best_y is None:
        return SearchResult(None, None, None, None, None, Status.BOUNDARY_DEGENERATE, False,
                            {"evaluated": 0}, 0, "brute-force")
    return _result(space, best_y, False, {"evaluated": evaluated, "resolution": resolution},
                   evaluated, "brute-force")
