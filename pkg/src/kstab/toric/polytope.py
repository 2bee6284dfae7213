"""Rational polytopes in dimension 1 to 3: facets, triangulations, measures.

Everything is exact.  Hulls are found by brute force over n-subsets of the
input points, which is adequate for the handful of vertices a moment polytope
has at desk scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from ..errors import DegeneratePolytope, KStabError, UnsupportedDimension
from ..exact import Q, det, format_rational, nullspace, rank, solve_linear

Point = tuple[Fraction, ...]
MAX_DIMENSION = 3


def as_point(p) -> Point:
    return tuple(Q(x) for x in p)


def affine_rank(points: Sequence[Point]) -> int:
    if len(points) <= 1:
        return 0
    p0 = points[0]
    return rank([[a - b for a, b in zip(p, p0)] for p in points[1:]])


def primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to a coprime integer vector with the same direction."""
    lcm = 1
    for x in v:
        lcm = lcm * Fraction(x).denominator // math.gcd(lcm, Fraction(x).denominator)
    ints = [int(Fraction(x) * lcm) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        raise KStabError("zero vector has no primitive direction")
    return tuple(x // g for x in ints)


def simplex_volume(simplex: Sequence[Point]) -> Fraction:
    p0 = simplex[0]
    n = len(p0)
    m = [[a - b for a, b in zip(p, p0)] for p in simplex[1:]]
    return abs(det(m)) / math.factorial(n)


def facet_measure(face: Sequence[Point], normal: Sequence[int]) -> Fraction:
    """Lattice-normalized (n-1)-volume of a simplex lying in a hyperplane with primitive normal.

    The facet lattice has covolume 1, so the measure is ``|det(e_1..e_{n-1}, x)| / (n-1)!``
    for any ``x`` with ``normal . x = 1``.
    """
    n = len(normal)
    j = next(i for i, u in enumerate(normal) if u)
    x = [Fraction(0)] * n
    x[j] = Fraction(1, normal[j])
    p0 = face[0]
    rows = [[a - b for a, b in zip(p, p0)] for p in face[1:]] + [x]
    return abs(det(rows)) / math.factorial(n - 1)


def barycentric(simplex: Sequence[Point], x: Point) -> list[Fraction]:
    """Barycentric coordinates of ``x`` with respect to a full-dimensional simplex."""
    n = len(x)
    m = [[simplex[j][i] for j in range(n + 1)] for i in range(n)] + [[Fraction(1)] * (n + 1)]
    return solve_linear(m, list(x) + [Fraction(1)])


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]  # primitive, inward
    offset: Fraction  # facet is {x : normal . x = offset}, polytope is normal . x >= offset
    vertex_ids: frozenset[int]

    def value(self, x: Point) -> Fraction:
        return sum((u * a for u, a in zip(self.normal, x)), Fraction(0)) - self.offset


@dataclass(frozen=True)
class LatticePolytope:
    vertices: tuple[Point, ...]
    facets: tuple[Facet, ...]

    @property
    def dimension(self) -> int:
        return len(self.vertices[0])

    def contains(self, x) -> bool:
        x = as_point(x)
        return all(f.value(x) >= 0 for f in self.facets)

    def on_boundary(self, x) -> bool:
        x = as_point(x)
        return self.contains(x) and any(f.value(x) == 0 for f in self.facets)

    def facet_of(self, points: Sequence[Point]) -> Facet | None:
        """The facet containing all given points, if any."""
        for f in self.facets:
            if all(f.value(p) == 0 for p in points):
                return f
        return None

    @property
    def is_integral(self) -> bool:
        return all(x.denominator == 1 for v in self.vertices for x in v)

    @cached_property
    def triangulation(self) -> tuple[tuple[Point, ...], ...]:
        """Pulling triangulation from the lexicographically smallest vertex."""
        n = self.dimension
        ids = _pull(self, frozenset(range(len(self.vertices))), n)
        return tuple(tuple(self.vertices[i] for i in s) for s in ids)

    def facet_triangulation(self, facet: Facet) -> tuple[tuple[Point, ...], ...]:
        ids = _pull(self, facet.vertex_ids, self.dimension - 1)
        return tuple(tuple(self.vertices[i] for i in s) for s in ids)

    def to_json(self) -> list[list[str]]:
        return [[format_rational(x) for x in v] for v in self.vertices]


def _pull(P: LatticePolytope, face: frozenset[int], dim: int) -> list[tuple[int, ...]]:
    if dim == 0:
        return [tuple(face)]
    v0 = min(face)
    subfaces = set()
    for f in P.facets:
        sub = face & f.vertex_ids
        if sub != face and len(sub) >= dim and affine_rank([P.vertices[i] for i in sorted(sub)]) == dim - 1:
            subfaces.add(sub)
    out = []
    for sub in sorted(subfaces, key=sorted):
        if v0 in sub:
            continue
        for s in _pull(P, sub, dim - 1):
            out.append((v0,) + s)
    return out


def facet_description(vertices: Iterable) -> LatticePolytope:
    """Convex hull of rational points with primitive inward facet normals."""
    pts = sorted(set(as_point(v) for v in vertices))
    if not pts:
        raise DegeneratePolytope("no points given")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise KStabError("points of mixed dimension")
    if n > MAX_DIMENSION:
        raise UnsupportedDimension(f"dimension {n} > {MAX_DIMENSION}")
    if n == 0:
        raise UnsupportedDimension("dimension 0")
    if affine_rank(pts) < n:
        raise DegeneratePolytope(f"points span an affine space of dimension {affine_rank(pts)} < {n}")

    halfspaces: dict[tuple, set[int]] = {}
    for combo in itertools.combinations(range(len(pts)), n):
        base = [pts[i] for i in combo]
        diffs = [[a - b for a, b in zip(p, base[0])] for p in base[1:]]
        ns = nullspace(diffs, n) if diffs else [[Fraction(1)]]
        if len(ns) != 1:
            continue
        normal = primitive(ns[0])
        vals = [sum((u * a for u, a in zip(normal, p)), Fraction(0)) for p in pts]
        c = sum((u * a for u, a in zip(normal, base[0])), Fraction(0))
        if all(x >= c for x in vals):
            pass
        elif all(x <= c for x in vals):
            normal, c = tuple(-u for u in normal), -c
        else:
            continue
        key = (normal, c)
        if key not in halfspaces:
            halfspaces[key] = {i for i, p in enumerate(pts) if sum((u * a for u, a in zip(normal, p)), Fraction(0)) == c}

    # vertices: points cut out by n independent facet normals
    incident = {i: [k for k, on in halfspaces.items() if i in on] for i in range(len(pts))}
    vert_ids = [i for i in range(len(pts)) if rank([list(k[0]) for k in incident[i]] or [[0] * n]) == n]
    verts = tuple(pts[i] for i in vert_ids)
    remap = {old: new for new, old in enumerate(vert_ids)}
    facets = []
    for (normal, c), on in sorted(halfspaces.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        ids = frozenset(remap[i] for i in on if i in remap)
        facets.append(Facet(normal, c, ids))
    return LatticePolytope(verts, tuple(facets))


def triangulate_points(points: Iterable) -> list[tuple[Point, ...]]:
    """Triangulation of the convex hull of the points (its vertices only)."""
    return list(facet_description(points).triangulation)


def volume(P: LatticePolytope) -> Fraction:
    return sum((simplex_volume(s) for s in P.triangulation), Fraction(0))


def boundary_volume(P: LatticePolytope) -> Fraction:
    """Total lattice-normalized boundary measure."""
    total = Fraction(0)
    for f in P.facets:
        total += sum((facet_measure(s, f.normal) for s in P.facet_triangulation(f)), Fraction(0))
    return total


def lattice_points(P: LatticePolytope, k: int = 1) -> list[tuple[int, ...]]:
    """Points of ``kP`` with integer coordinates, in lexicographic order."""
    if k < 1:
        raise KStabError("dilation factor must be a positive integer")
    n = P.dimension
    lo = [math.floor(min(v[i] for v in P.vertices) * k) for i in range(n)]
    hi = [math.ceil(max(v[i] for v in P.vertices) * k) for i in range(n)]
    rhs = [(f.normal, math.ceil(f.offset * k)) for f in P.facets]
    out = []
    for u in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if all(sum(c * x for c, x in zip(normal, u)) >= r for normal, r in rhs):
            out.append(u)
    return out


# ---------------------------------------------------------------------------
# triangulations with explicit nodes


@dataclass(frozen=True)
class Triangulation:
    """Conforming triangulation given by nodes and simplices of node indices."""

    nodes: tuple[Point, ...]
    simplices: tuple[tuple[int, ...], ...]

    @classmethod
    def of_polytope(cls, P: LatticePolytope) -> Triangulation:
        nodes = P.vertices
        index = {v: i for i, v in enumerate(nodes)}
        return cls(nodes, tuple(tuple(sorted(index[p] for p in s)) for s in P.triangulation))

    def simplex_points(self, s: Sequence[int]) -> tuple[Point, ...]:
        return tuple(self.nodes[i] for i in s)

    @property
    def dimension(self) -> int:
        return len(self.nodes[0])

    def interior_faces(self) -> list[tuple[tuple[int, ...], int, int]]:
        """Codimension-one faces shared by two simplices, with the two opposite nodes."""
        seen: dict[tuple[int, ...], list[int]] = {}
        for s in self.simplices:
            for i in s:
                face = tuple(sorted(j for j in s if j != i))
                seen.setdefault(face, []).append(i)
        return [(face, opp[0], opp[1]) for face, opp in sorted(seen.items()) if len(opp) == 2]

    def boundary_faces(self) -> list[tuple[int, ...]]:
        seen: dict[tuple[int, ...], int] = {}
        for s in self.simplices:
            for i in s:
                face = tuple(sorted(j for j in s if j != i))
                seen[face] = seen.get(face, 0) + 1
        return sorted(face for face, c in seen.items() if c == 1)

    def locate(self, x: Point) -> tuple[tuple[int, ...], list[Fraction]]:
        for s in self.simplices:
            lam = barycentric(self.simplex_points(s), x)
            if all(l >= 0 for l in lam):
                return s, lam
        raise KStabError(f"point {[format_rational(c) for c in x]} lies outside the triangulation")

    def insert(self, x) -> Triangulation:
        """Stellar subdivision at ``x``: every simplex containing ``x`` is split
        along the face carrying ``x`` in its relative interior."""
        x = as_point(x)
        if x in self.nodes:
            return self
        nodes = self.nodes + (x,)
        new = len(self.nodes)
        simplices = []
        hit = False
        for s in self.simplices:
            lam = barycentric(self.simplex_points(s), x)
            if any(l < 0 for l in lam):
                simplices.append(s)
                continue
            hit = True
            carrier = [v for v, l in zip(s, lam) if l > 0]
            for v in carrier:
                simplices.append(tuple(sorted(new if j == v else j for j in s)))
        if not hit:
            raise KStabError(f"point {[format_rational(c) for c in x]} lies outside the triangulation")
        return Triangulation(nodes, tuple(sorted(simplices)))

    def to_json(self) -> dict:
        return {
            "nodes": [[format_rational(c) for c in p] for p in self.nodes],
            "simplices": [list(s) for s in self.simplices],
        }


def refined_triangulation(P: LatticePolytope, m: int = 0, extra: Iterable = ()) -> Triangulation:
    """Triangulation of P with the given extra nodes and, for ``m >= 1``, every
    point of ``(1/m) Z^n`` in P.

    Points are inserted by stellar subdivision, explicit ``extra`` points first,
    then the grid in lexicographic order.
    """
    T = Triangulation.of_polytope(P)
    for x in extra:
        x = as_point(x)
        if not P.contains(x):
            raise KStabError(f"node {[format_rational(c) for c in x]} lies outside the polytope")
        T = T.insert(x)
    pts = [tuple(Fraction(c, m) for c in u) for u in lattice_points(P, m)] if m >= 1 else []
    for x in pts:
        T = T.insert(x)
    return T
