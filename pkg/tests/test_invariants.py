import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kstab.errors import (
    DegenerateNorm,
    DimensionMismatch,
    KStabError,
    NegativeNormSquare,
    PositiveDF,
    ZeroDenominator,
)
from kstab.exact import solve_linear
from kstab.invariants import (
    Convention,
    EquivariantModel,
    HilbertData,
    LieAlgebraPoint,
    WeightData,
    compare_normalized,
    compose,
    describe,
    donaldson_futaki,
    extremal_scaling,
    futaki_vector,
    gram_matrix,
    inner_product,
    l2_norm,
    norm_squared,
    normalized_df,
    relative_df,
    signed_square,
    sqrt_rational,
    synthetic_model,
)

from .helpers import random_fraction, random_synthetic_model, small_fractions


def one_action_model(a0, a1, b0, b1, d0):
    return EquivariantModel(HilbertData(1, Fraction(a0), Fraction(a1)), 1,
                            (("v", WeightData(Fraction(b0), Fraction(b1))),), ((Fraction(d0),),))


def test_df_formula_on_hand_data():
    # (b0 a1 - b1 a0)/a0 = (3*5 - 4*2)/2
    m = one_action_model(2, 5, 3, 4, 9)
    assert donaldson_futaki(m, m.basis(0)) == Fraction(7, 2)


def test_trace_free_and_paper_products_on_hand_data():
    m = one_action_model(2, 5, 3, 4, 9)
    e = m.basis(0)
    assert inner_product(m, e, e) == 9 - Fraction(9, 2)
    assert inner_product(m, e, e, Convention.PAPER) == Fraction(9 - 9, 2)
    assert inner_product(m, e, e, "paper") == 0


def test_hilbert_data_validation():
    with pytest.raises(KStabError):
        HilbertData(1, Fraction(0), Fraction(1))
    with pytest.raises(KStabError):
        one_action_model(1, 1, 2, 0, 3)  # d0 - b0^2/a0 < 0


def test_model_rejects_asymmetric_d0():
    with pytest.raises(KStabError):
        EquivariantModel(HilbertData(1, Fraction(1), Fraction(1)), 1,
                         (("a", WeightData(Fraction(0), Fraction(0))), ("b", WeightData(Fraction(0), Fraction(0)))),
                         ((Fraction(1), Fraction(1)), (Fraction(0), Fraction(1))))


def test_point_arithmetic_and_mismatch():
    v = LieAlgebraPoint.of(1, "1/2")
    w = LieAlgebraPoint.of(0, 2)
    assert (v + w).coefficients == (1, Fraction(5, 2))
    assert (v * 2 - w).coefficients == (2, -1)
    assert (-v)[1] == Fraction(-1, 2)
    assert LieAlgebraPoint.zero(3).is_zero()
    with pytest.raises(DimensionMismatch):
        v + LieAlgebraPoint.of(1)


def test_synthetic_model_reproduces_prescribed_data(rng):
    for _ in range(20):
        model, futaki, gram = random_synthetic_model(rng)
        assert futaki_vector(model) == futaki
        assert gram_matrix(model) == gram


def test_model_json_round_trip(rng):
    for _ in range(10):
        model, _, _ = random_synthetic_model(rng)
        text = json.dumps(model.to_json(), sort_keys=True)
        assert EquivariantModel.from_json(json.loads(text)) == model


def test_model_json_errors_name_field():
    with pytest.raises(KStabError, match="a1"):
        EquivariantModel.from_json({"n": 1, "r": 1, "a0": "1", "actions": [], "d0": []})


@given(st.data())
def test_df_is_linear(data):
    import random

    rng = random.Random(data.draw(st.integers(0, 10**6)))
    model, _, _ = random_synthetic_model(rng)
    m = data.draw(small_fractions())
    v = model.point(*[random_fraction(rng) for _ in range(model.size)])
    w = model.point(*[random_fraction(rng) for _ in range(model.size)])
    assert donaldson_futaki(model, compose(model, v, w, m)) == m * donaldson_futaki(model, v) + donaldson_futaki(model, w)


@given(st.data())
def test_norm_expansion(data):
    import random

    rng = random.Random(data.draw(st.integers(0, 10**6)))
    model, _, _ = random_synthetic_model(rng)
    m = data.draw(small_fractions())
    v = model.point(*[random_fraction(rng) for _ in range(model.size)])
    w = model.point(*[random_fraction(rng) for _ in range(model.size)])
    for conv in Convention:
        lhs = norm_squared(model, compose(model, v, w, m), conv)
        rhs = m * m * norm_squared(model, v, conv) + 2 * m * inner_product(model, v, w, conv) + norm_squared(model, w, conv)
        assert lhs == rhs


def test_compose_example_from_pythagoras():
    model = synthetic_model([0, 0], [[1, 0], [0, 4]])
    v, w = model.basis(0), model.basis(1)
    assert norm_squared(model, compose(model, v, w, 3)) == 13


def test_constant_twist_is_trace_free_null():
    # a twist shifts all weights by c: b0 = c a0, b1 = c a1, d0 = c^2 a0
    a0, a1, c = Fraction(3, 2), Fraction(5, 2), Fraction(7, 3)
    m = one_action_model(a0, a1, c * a0, c * a1, c * c * a0)
    e = m.basis(0)
    assert donaldson_futaki(m, e) == 0
    assert norm_squared(m, e) == 0
    assert norm_squared(m, e, Convention.PAPER) == c * c * (1 - a0)


@given(small_fractions(10**4, 10**4).filter(lambda q: q >= 0),
       st.sampled_from([Fraction(1, 10), Fraction(1, 10**6), Fraction(1, 10**12)]))
def test_sqrt_bracket_is_certified(x, eps):
    r = sqrt_rational(x, eps)
    assert r >= 0
    assert r * r <= x < (r + eps) ** 2


def test_sqrt_exact_on_squares_and_rejects_negative():
    assert sqrt_rational(Fraction(9, 49)) == Fraction(3, 7)
    with pytest.raises(NegativeNormSquare):
        sqrt_rational(-1)
    with pytest.raises(KStabError):
        sqrt_rational(2, 0)


def test_l2_norm_of_negative_paper_norm_raises():
    m = one_action_model(2, 1, 1, 0, 1)  # paper norm (1 - 1)/2 = 0, trace-free 1/2
    m2 = one_action_model(2, 1, 2, 0, 3)  # paper (3 - 4)/2 < 0
    assert l2_norm(m, m.basis(0), convention="paper") == 0
    with pytest.raises(NegativeNormSquare):
        l2_norm(m2, m2.basis(0), convention="paper")


def test_relative_df_conventions():
    model = synthetic_model([1, -2], [[2, 1], [1, 3]])
    a, b = model.basis(0), model.basis(1)
    # trace-free: DF(a) - <a,b>/<b,b> DF(b) = 1 - (1/3)(-2)
    assert relative_df(model, a, b) == Fraction(5, 3)
    # paper-literal denominator <a,a>; a0 = 1 and b0 = 0 make the products agree
    assert relative_df(model, a, b, Convention.PAPER) == 1 - Fraction(1, 2) * -2
    orth = a - b * Fraction(1, 3)
    assert relative_df(model, orth, b) == donaldson_futaki(model, orth)


def test_relative_df_zero_denominator():
    # indefinite Gram: <e0,e0> = 0 while <e0,e1> = 1
    model = synthetic_model([1, 1], [[0, 1], [1, 1]])
    a, b = model.basis(0), model.basis(1)
    assert relative_df(model, a, b) == 0
    with pytest.raises(ZeroDenominator):
        relative_df(model, a, b, Convention.PAPER)
    with pytest.raises(ZeroDenominator):
        relative_df(model, b, a)


def test_extremal_scaling():
    model = synthetic_model([-2], [[4]])
    s = extremal_scaling(model, model.basis(0))
    assert s.scale == Fraction(1, 2)
    assert donaldson_futaki(model, s.point) == -norm_squared(model, s.point)
    flat = synthetic_model([0], [[4]])
    assert extremal_scaling(flat, flat.basis(0)).semistable_branch
    with pytest.raises(PositiveDF):
        extremal_scaling(synthetic_model([1], [[1]]), LieAlgebraPoint.of(1))
    with pytest.raises(DegenerateNorm):
        extremal_scaling(synthetic_model([1], [[1]]), LieAlgebraPoint.of(0))


@given(small_fractions(), small_fractions().filter(lambda q: q > 0),
       small_fractions(), small_fractions().filter(lambda q: q > 0))
def test_root_free_comparison_matches_decimal(df1, ns1, df2, ns2):
    c = compare_normalized(df1, ns1, df2, ns2)
    x = float(df1) / float(ns1) ** 0.5
    y = float(df2) / float(ns2) ** 0.5
    if abs(x - y) > 1e-9:
        assert c == (1 if x > y else -1)
    if df1 * df1 * ns2 == df2 * df2 * ns1 and (df1 > 0) == (df2 > 0) and (df1 == 0) == (df2 == 0):
        assert c == 0


def test_normalized_df_signed_square():
    model = synthetic_model([-3], [[4]])
    nd = normalized_df(model, model.basis(0))
    assert nd.signed_square == Fraction(-9, 4)
    assert nd.approx == Fraction(-3, 2)
    assert nd.sign == -1
    with pytest.raises(DegenerateNorm):
        signed_square(1, 0)


def test_describe_is_json_ready():
    model = synthetic_model([-3], [[4]])
    d = describe(model, model.basis(0))
    assert d["df"] == {"exact": "-3", "approx": "-3.000000000000"}
    assert d["normalized_df"]["signed_square"] == "-9/4"
    json.dumps(d)


def test_inverse_gram_candidate_is_stationary(rng):
    model, futaki, gram = random_synthetic_model(rng, 3)
    v = model.point(*[-x for x in solve_linear(gram, futaki)])
    for i in range(3):
        e = model.basis(i)
        # DF(e) = F_i = -<v, e>
        assert donaldson_futaki(model, e) == -inner_product(model, v, e)
