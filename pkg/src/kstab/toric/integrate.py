"""Exact integration of PL functions over a polytope and its boundary.

Integrals are sums of per-simplex barycentric moments over a decomposition of
the polytope on which every integrand is affine:

* ``int_T f = vol(T) * mean of f at the vertices``
* ``int_T f g = vol(T) / ((n+1)(n+2)) * (sum f_i g_i + sum f_i * sum g_i)``

Boundary integrals use the codimension-one faces of the decomposition that lie
in a facet of P, measured with the lattice-normalized facet measure.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from ..errors import CreaseMismatch
from .functions import MaxAffine, as_max_affine, eval_piece
from .polytope import (
    LatticePolytope,
    Point,
    facet_measure,
    simplex_volume,
    triangulate_points,
)

Simplex = tuple[Point, ...]


def _argmax(f: MaxAffine, x: Point) -> set[int]:
    vals = [eval_piece(p, x) for p in f.pieces]
    m = max(vals)
    return {i for i, v in enumerate(vals) if v == m}


def _split_plane(f: MaxAffine, simplex: Simplex):
    """A crease hyperplane strictly separating vertices of ``simplex``, or None
    if a single piece of ``f`` is maximal at every vertex (f affine on it)."""
    maxima = [_argmax(f, v) for v in simplex]
    if set.intersection(*maxima):
        return None
    active = sorted(set.union(*maxima))
    for i, j in itertools.combinations(active, 2):
        (gi, ci), (gj, cj) = f.pieces[i], f.pieces[j]
        grad = tuple(a - b for a, b in zip(gi, gj))
        const = ci - cj
        vals = [eval_piece((grad, const), v) for v in simplex]
        if any(v > 0 for v in vals) and any(v < 0 for v in vals):
            return grad, const
    raise AssertionError("impure simplex without a separating crease")


def _cut(simplex: Simplex, plane) -> tuple[list[Simplex], list[Simplex]]:
    vals = [eval_piece(plane, v) for v in simplex]
    pos = [v for v, h in zip(simplex, vals) if h >= 0]
    neg = [v for v, h in zip(simplex, vals) if h <= 0]
    for (a, ha), (b, hb) in itertools.combinations(zip(simplex, vals), 2):
        if (ha > 0 > hb) or (ha < 0 < hb):
            t = ha / (ha - hb)
            x = tuple(p + t * (q - p) for p, q in zip(a, b))
            pos.append(x)
            neg.append(x)
    return triangulate_points(pos), triangulate_points(neg)


def crease_decomposition(P: LatticePolytope, functions: Sequence = ()) -> list[Simplex]:
    """Simplices with disjoint interiors covering P, each on which every function is affine.

    Starts from the pulling triangulation of P and splits any simplex that
    straddles a crease along that crease.
    """
    fs = [as_max_affine(f) for f in functions]
    work = list(P.triangulation)
    done = []
    while work:
        s = work.pop()
        for f in fs:
            plane = _split_plane(f, s)
            if plane is not None:
                a, b = _cut(s, plane)
                work.extend(a)
                work.extend(b)
                break
        else:
            done.append(s)
    done.sort()
    return done


def _values(f, simplex: Simplex) -> list[Fraction]:
    return [f(v) for v in simplex]


def check_affine(f, simplex: Simplex) -> None:
    """Centroid test: a convex f is affine on a simplex iff f(centroid) equals the vertex mean."""
    n1 = len(simplex)
    centroid = tuple(sum(c) / n1 for c in zip(*simplex))
    if f(centroid) != sum(_values(f, simplex), Fraction(0)) / n1:
        raise CreaseMismatch("a simplex interior straddles a crease of the integrand")


def _cells(P, functions, triangulation):
    if triangulation is None:
        return crease_decomposition(P, functions)
    for s in triangulation:
        for f in functions:
            check_affine(f, s)
    return list(triangulation)


def integrate_pl(P: LatticePolytope, f, triangulation: Sequence[Simplex] | None = None) -> Fraction:
    f = as_max_affine(f)
    return integrate_on(_cells(P, [f], triangulation), f)


def integrate_boundary(P: LatticePolytope, f, triangulation: Sequence[Simplex] | None = None) -> Fraction:
    f = as_max_affine(f)
    return integrate_boundary_on(P, _cells(P, [f], triangulation), f)


def integrate_product(P: LatticePolytope, f, g, triangulation: Sequence[Simplex] | None = None) -> Fraction:
    f, g = as_max_affine(f), as_max_affine(g)
    return integrate_product_on(_cells(P, [f, g], triangulation), f, g)


def integrate_on(cells: Sequence[Simplex], f) -> Fraction:
    total = Fraction(0)
    for s in cells:
        total += simplex_volume(s) * sum(_values(f, s), Fraction(0)) / len(s)
    return total


def integrate_product_on(cells: Sequence[Simplex], f, g) -> Fraction:
    total = Fraction(0)
    for s in cells:
        n = len(s) - 1
        fv, gv = _values(f, s), _values(g, s)
        moment = sum((a * b for a, b in zip(fv, gv)), Fraction(0)) + sum(fv, Fraction(0)) * sum(gv, Fraction(0))
        total += simplex_volume(s) * moment / ((n + 1) * (n + 2))
    return total


def boundary_cells(P: LatticePolytope, cells: Sequence[Simplex]) -> list[tuple[Simplex, tuple[int, ...]]]:
    """Faces of the decomposition lying in a facet of P, with that facet's normal."""
    out = []
    for s in cells:
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            facet = P.facet_of(face)
            if facet is not None:
                out.append((face, facet.normal))
    return out


def integrate_boundary_on(P: LatticePolytope, cells: Sequence[Simplex], f) -> Fraction:
    total = Fraction(0)
    for face, normal in boundary_cells(P, cells):
        total += facet_measure(face, normal) * sum(_values(f, face), Fraction(0)) / len(face)
    return total
