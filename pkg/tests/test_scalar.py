import math
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from maxdyn.scalar import (
    PrecisionExhausted,
    Scalar,
    ScalarSyntaxError,
    parse_scalar,
    rational_ratio,
    sign,
    smax,
    smin,
    squarefree_decompose,
    to_float,
)

from conftest import rationals, scalars

S2 = Scalar.sqrt(2)


def high_precision(s: Scalar, digits=60) -> Decimal:
    getcontext().prec = digits
    total = Decimal(0)
    for m, c in s.terms.items():
        total += Decimal(c.numerator) / Decimal(c.denominator) * Decimal(m).sqrt()
    return total


# -- parsing --------------------------------------------------------------


@pytest.mark.parametrize(
    "text, terms",
    [
        ("3/2+2*sqrt(2)", {1: Fraction(3, 2), 2: 2}),
        ("sqrt(8)", {2: 2}),
        ("0", {}),
        ("-5", {1: -5}),
        ("1/2 - 3*sqrt(6)", {1: Fraction(1, 2), 6: -3}),
        ("sqrt(2) - sqrt(2)", {}),
        ("  4/6*sqrt(12) ", {3: Fraction(4, 3)}),
        ("sqrt(1)", {1: 1}),
    ],
)
def test_parse_examples(text, terms):
    assert parse_scalar(text).terms == terms


@pytest.mark.parametrize(
    "text, position",
    [("", 0), ("2*", 2), ("sqrt(0)", 5), ("1/0", 2), ("2 3", 2), ("sqrt(-2)", 5), ("abc", 0)],
)
def test_parse_errors_report_position(text, position):
    with pytest.raises(ScalarSyntaxError) as info:
        parse_scalar(text)
    assert info.value.position == position


@given(scalars())
def test_render_round_trips(s):
    assert parse_scalar(str(s)) == s
    assert parse_scalar(str(s)).terms == s.terms


def test_render_order_and_form():
    assert str(Scalar.from_terms({6: -3, 1: Fraction(1, 2)})) == "1/2 - 3*sqrt(6)"
    assert str(Scalar(0)) == "0"
    assert str(-S2) == "-sqrt(2)"
    assert str(3 - S2) == "3 - sqrt(2)"


def test_squarefree_decompose():
    assert squarefree_decompose(8) == (2, 2)
    assert squarefree_decompose(72) == (6, 2)
    assert squarefree_decompose(12) == (2, 3)
    assert squarefree_decompose(1) == (1, 1)


# -- arithmetic -----------------------------------------------------------


def test_arith_examples():
    assert (Scalar.from_terms({2: 2}) + Scalar.from_terms({1: 1, 2: -2})).terms == {1: 1}
    assert smax(Scalar(1), S2) == S2
    assert (-Scalar(0)).terms == {}
    assert smin(Scalar(1), S2) == 1
    assert abs(1 - S2) == S2 - 1
    assert S2.scale(Fraction(3, 2)).terms == {2: Fraction(3, 2)}


def test_irrational_product_is_refused():
    with pytest.raises(TypeError):
        S2 * Scalar.sqrt(3)
    assert S2 * 2 == Scalar.sqrt(8)
    assert (S2 / Scalar(2)).terms == {2: Fraction(1, 2)}


def test_floor_exact():
    assert (S2 + 10 * Scalar.sqrt(3)).floor() == 18
    assert (-S2).floor() == -2
    assert Scalar(Fraction(-7, 2)).floor() == -4


@given(scalars(), scalars(), scalars())
def test_addition_associative_and_commutative(a, b, c):
    assert ((a + b) + c).terms == (a + (b + c)).terms
    assert a + b == b + a
    assert (a - a).is_zero()


@given(scalars(), rationals(), rationals())
def test_scaling_distributes(a, p, q):
    assert a.scale(p) + a.scale(q) == a.scale(p + q)


@given(rationals(), rationals())
def test_rational_scalars_hash_like_fractions(p, q):
    assert hash(Scalar(p)) == hash(p)
    assert (Scalar(p) < Scalar(q)) == (p < q)


# -- sign -----------------------------------------------------------------


@pytest.mark.parametrize(
    "terms, expected",
    [({}, 0), ({1: 3, 2: -2}, 1), ({1: 1, 3: -1}, -1), ({2: 1, 3: 1, 5: -3}, -1), ({2: 1, 3: 1, 5: -1}, 1)],
)
def test_sign_examples(terms, expected):
    assert Scalar.from_terms(terms).sign() == expected
    assert sign(Scalar.from_terms(terms)) == expected


def test_sign_near_cancellation():
    # 99/70 approximates sqrt(2) to 7e-5; 665857/470832 to 2e-12
    assert (S2 - Fraction(99, 70)).sign() == -1
    assert (S2 - Fraction(665857, 470832)).sign() == -1
    tiny = S2 + Scalar.sqrt(3) - Scalar(Fraction(3146264369, 1000000000))
    assert tiny.sign() == (1 if high_precision(tiny) > 0 else -1)


def test_precision_cap_is_enforced():
    from maxdyn.scalar import _sign_of

    s = Scalar.from_terms({2: 1, 3: 1, 5: -1, 1: Fraction(-1, 10**40)})
    assert _sign_of(s._nums, cap=1 << 12) == s.sign()
    with pytest.raises(PrecisionExhausted):
        _sign_of(s._nums, cap=8)


@given(scalars())
def test_sign_agrees_with_float(a):
    eps = 1e-12
    f = to_float(a, eps)
    if abs(f) > 2 * eps:
        assert a.sign() == (1 if f > 0 else -1)


# -- rational_ratio -------------------------------------------------------


def test_rational_ratio_examples():
    assert rational_ratio(Scalar.from_terms({2: 2}), S2) == 2
    assert rational_ratio(Scalar(1), Scalar.from_terms({2: 2})) is None
    assert rational_ratio(Scalar(0), Scalar(5)) == 0
    with pytest.raises(ZeroDivisionError):
        rational_ratio(S2, Scalar(0))


@given(scalars(), rationals())
def test_rational_ratio_recovers_scaling(b, q):
    if b.is_zero():
        return
    r = rational_ratio(b.scale(q), b)
    assert r == q
    assert (b.scale(q) - b.scale(r)).is_zero()


@given(scalars(), scalars())
def test_rational_ratio_implies_exact_multiple(a, b):
    if b.is_zero():
        return
    q = rational_ratio(a, b)
    if q is not None:
        assert (a - b.scale(q)).is_zero()


# -- to_float -------------------------------------------------------------


def test_to_float_examples():
    assert abs(to_float(S2, 1e-12) - 1.4142135623730951) <= 1e-12
    assert to_float(Scalar(0), 1e-3) == 0.0
    big = S2 + 10 * Scalar.sqrt(3)
    assert abs(Decimal(to_float(big, 1e-9)) - high_precision(big)) <= Decimal("1e-9")
    # 1.4142135... + 17.3205080... = 18.7347216...
    assert f"{to_float(big, 1e-9):.6f}" == "18.734722"


@given(scalars(), st.sampled_from([1e-3, 1e-9, 1e-14]))
def test_to_float_error_bound(a, bound):
    f = to_float(a, bound)
    # the final rounding to a double adds up to half an ulp on top of the bound
    assert abs(Decimal(f) - high_precision(a)) <= Decimal(bound) + Decimal(math.ulp(f)) / 2
