"""Rational piecewise-linear convex functions on a polytope.

Two representations are supported: :class:`MaxAffine` (a maximum of affine
pieces, convex by construction) and :class:`NodeValues` (values at the nodes of
a fixed triangulation, convex only if every interior face has a nonnegative
second difference).  Both expose ``pieces``, the max-affine form used by the
integrator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import KStabError, NotConvex
from ..exact import Q, format_rational, parse_rational, solve_linear
from .polytope import Point, Triangulation, as_point, barycentric, primitive

Piece = tuple[tuple[Fraction, ...], Fraction]  # (gradient, constant)


def eval_piece(piece: Piece, x: Point) -> Fraction:
    grad, c = piece
    return sum((g * a for g, a in zip(grad, x)), c)


@dataclass(frozen=True)
class MaxAffine:
    pieces: tuple[Piece, ...]

    def __post_init__(self):
        if not self.pieces:
            raise KStabError("a max-affine function needs at least one piece")
        pieces = tuple((tuple(Q(g) for g in grad), Q(c)) for grad, c in self.pieces)
        if len({len(g) for g, _ in pieces}) != 1:
            raise KStabError("affine pieces of mixed dimension")
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def affine(cls, grad, const=0) -> MaxAffine:
        return cls(((tuple(grad), const),))

    @classmethod
    def constant(cls, c, dimension: int) -> MaxAffine:
        return cls((((0,) * dimension, c),))

    @property
    def dimension(self) -> int:
        return len(self.pieces[0][0])

    def __call__(self, x) -> Fraction:
        x = as_point(x)
        return max(eval_piece(p, x) for p in self.pieces)

    def to_json(self) -> dict:
        return {
            "type": "max_affine",
            "pieces": [{"grad": [format_rational(g) for g in grad], "const": format_rational(c)}
                       for grad, c in self.pieces],
        }


def affine_on(simplex: Sequence[Point], values: Sequence[Fraction]) -> Piece:
    """The affine function taking ``values`` at the simplex vertices."""
    n = len(simplex[0])
    rows = [list(p) + [Fraction(1)] for p in simplex]
    sol = solve_linear(rows, list(values))
    return tuple(sol[:n]), sol[n]


def second_differences(T: Triangulation) -> list[tuple[int, ...]]:
    """Integer functionals on node-value vectors, one per distinct interior-face
    condition; a node-value vector is convex iff all are nonnegative on it.

    For a face shared by simplices ``face+a`` and ``face+b`` the functional is
    ``x_b`` minus the affine extension of the first simplex evaluated at ``b``.
    """
    rows = []
    seen = set()
    for face, a, b in T.interior_faces():
        simplex = face + (a,)
        lam = barycentric(T.simplex_points(simplex), T.nodes[b])
        row = [Fraction(0)] * len(T.nodes)
        row[b] += 1
        for j, l in zip(simplex, lam):
            row[j] -= l
        r = primitive(row)
        if r not in seen:
            seen.add(r)
            rows.append(r)
    return rows


@dataclass(frozen=True)
class NodeValues:
    triangulation: Triangulation
    values: tuple[Fraction, ...]

    def __post_init__(self):
        vals = tuple(Q(v) for v in self.values)
        if len(vals) != len(self.triangulation.nodes):
            raise KStabError("one value per triangulation node is required")
        object.__setattr__(self, "values", vals)

    @property
    def dimension(self) -> int:
        return self.triangulation.dimension

    def is_convex(self) -> bool:
        return all(
            sum((c * v for c, v in zip(row, self.values)), Fraction(0)) >= 0
            for row in second_differences(self.triangulation)
        )

    def check_convex(self) -> None:
        if not self.is_convex():
            raise NotConvex("node values violate a second-difference condition")

    @property
    def pieces(self) -> tuple[Piece, ...]:
        """Distinct affine pieces, one per simplex (meaningful only when convex)."""
        T = self.triangulation
        out = []
        for s in T.simplices:
            p = affine_on(T.simplex_points(s), [self.values[i] for i in s])
            if p not in out:
                out.append(p)
        return tuple(out)

    def __call__(self, x) -> Fraction:
        x = as_point(x)
        s, lam = self.triangulation.locate(x)
        return sum((l * self.values[i] for l, i in zip(lam, s)), Fraction(0))

    def as_max_affine(self) -> MaxAffine:
        self.check_convex()
        return MaxAffine(self.pieces)

    def to_json(self) -> dict:
        return {
            "type": "node_values",
            "triangulation": self.triangulation.to_json(),
            "values": [format_rational(v) for v in self.values],
        }


PLConvexFunction = MaxAffine | NodeValues


def as_max_affine(f) -> MaxAffine:
    if isinstance(f, MaxAffine):
        return f
    if isinstance(f, NodeValues):
        return f.as_max_affine()
    raise TypeError(f"not a PL function: {f!r}")


def triangulation_from_json(doc: dict) -> Triangulation:
    nodes = tuple(as_point(parse_rational(c) for c in p) for p in doc["nodes"])
    simplices = tuple(tuple(sorted(int(i) for i in s)) for s in doc["simplices"])
    return Triangulation(nodes, simplices)


def function_from_json(doc: dict):
    kind = doc.get("type")
    if kind == "max_affine":
        return MaxAffine(tuple(
            (tuple(parse_rational(g) for g in p["grad"]), parse_rational(p["const"]))
            for p in doc["pieces"]
        ))
    if kind == "node_values":
        f = NodeValues(triangulation_from_json(doc["triangulation"]),
                       tuple(parse_rational(v) for v in doc["values"]))
        f.check_convex()
        return f
    raise KStabError(f"unknown function type {kind!r}")
