from fractions import Fraction

import pytest

from kstab.errors import DimensionTooLarge, KStabError, NoNontrivialDirections
from kstab.exact import solve_linear
from kstab.invariants import futaki_vector, gram_matrix
from kstab.optimize import (
    Directions,
    Status,
    brute_force_search,
    build_search_space,
    canonical,
    minimize_normalized_df,
)
from kstab.toric import MaxAffine, Triangulation, build_model, refined_triangulation


@pytest.fixture(scope="module")
def spaces(polytopes):
    P = polytopes
    return {
        "segment": build_search_space(P["segment"], refined_triangulation(P["segment"], extra=[["1/2"]])),
        "segment_full": build_search_space(P["segment"], refined_triangulation(P["segment"], extra=[["1/2"]]),
                                           Directions.FULL),
        "trapezoid_affine": build_search_space(P["trapezoid"], Triangulation.of_polytope(P["trapezoid"]),
                                               Directions.AFFINE),
        "square_center": build_search_space(P["square"], refined_triangulation(P["square"], extra=[["1/2", "1/2"]])),
        "square_affine": build_search_space(P["square"], Triangulation.of_polytope(P["square"]), Directions.AFFINE),
        "simplex2_affine": build_search_space(P["simplex2"], Triangulation.of_polytope(P["simplex2"]),
                                              Directions.AFFINE),
    }


def test_segment_minimizer_is_the_crease(spaces):
    S = spaces["segment"]
    r = minimize_normalized_df(S)
    assert r.status is Status.STABLE and r.certified
    assert r.value_squared_signed == Fraction(3, 5)
    crease = MaxAffine((((0,), 0), ((2,), -1)))
    assert list(r.minimizer) == [crease(x) for x in S.triangulation.nodes]


def test_affine_optimum_matches_closed_form(polytopes, spaces):
    # over a linear space without constraints the minimum of DF/||.|| is
    # -sqrt(F^T G^{-1} F), with F and G taken from the equivariant model
    P = polytopes["trapezoid"]
    model = build_model(P, [MaxAffine.affine((1, 0)), MaxAffine.affine((0, 1))])
    F, G = futaki_vector(model), gram_matrix(model)
    expected = -sum(f * g for f, g in zip(F, solve_linear(G, F)))
    r = minimize_normalized_df(spaces["trapezoid_affine"])
    assert r.status is Status.DESTABILIZER
    assert r.value_squared_signed == expected == Fraction(-4, 39)


def test_affine_search_is_flat_on_symmetric_polytopes(spaces):
    # the unit square and the standard triangle have vanishing Futaki invariant
    for name in ("square_affine", "simplex2_affine"):
        r = minimize_normalized_df(spaces[name])
        assert r.value_squared_signed == 0 and r.status is Status.STABLE


def test_square_with_center(spaces):
    S = spaces["square_center"]
    assert len(S.reduced_constraints) == 2
    r = minimize_normalized_df(S)
    assert r.status is Status.STABLE
    assert r.value_squared_signed == Fraction(1, 2)
    assert S.is_convex(r.minimizer)


@pytest.mark.parametrize("name", ["segment", "segment_full", "trapezoid_affine", "square_center",
                                  "square_affine", "simplex2_affine"])
def test_active_set_beats_brute_force(spaces, name):
    S = spaces[name]
    r = minimize_normalized_df(S)
    gaps = []
    for N in (4, 8, 16):
        b = brute_force_search(S, N)
        assert r.value_squared_signed <= b.value_squared_signed
        assert S.is_convex(b.minimizer)
        gaps.append(b.value_squared_signed - r.value_squared_signed)
    assert gaps == sorted(gaps, reverse=True)


def test_certificate_residual_vanishes(spaces):
    for S in spaces.values():
        r = minimize_normalized_df(S)
        assert all(x == "0" for x in r.certificate["stationarity_residual"])


def test_seed_does_not_change_result(polytopes):
    T = refined_triangulation(polytopes["trapezoid"], m=1)
    S = build_search_space(polytopes["trapezoid"], T, Directions.FULL)
    results = {repr(minimize_normalized_df(S, seed=s).to_json()["minimizer"]) for s in range(4)}
    assert len(results) == 1


def test_refined_trapezoid_reaches_affine_value(polytopes):
    T = refined_triangulation(polytopes["trapezoid"], m=1)
    r = minimize_normalized_df(build_search_space(polytopes["trapezoid"], T, Directions.FULL))
    assert r.status is Status.DESTABILIZER
    assert r.value_squared_signed == Fraction(-4, 39)


def test_canonical_scaling():
    assert canonical([0, Fraction(-3), 6]) == (0, -1, 2)
    assert canonical([0, 0]) == (0, 0)


def test_errors(polytopes, spaces):
    P = polytopes["segment"]
    with pytest.raises(NoNontrivialDirections):
        build_search_space(P, Triangulation.of_polytope(P))
    big = build_search_space(polytopes["square"], refined_triangulation(polytopes["square"], m=2))
    assert big.dimension > 4
    with pytest.raises(DimensionTooLarge):
        brute_force_search(big, 2)
    with pytest.raises(KStabError):
        brute_force_search(spaces["segment"], 0)


def test_search_result_json(spaces):
    doc = minimize_normalized_df(spaces["segment"]).to_json()
    assert doc["value_squared_signed"] == "3/5"
    assert doc["value_approx"] == "0.774596668780"
    assert doc["status"] == "Stable"
