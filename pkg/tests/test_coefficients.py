"""Exact coefficient arithmetic: Gaussian rationals, polynomials,
rational functions, and the shared text grammar."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stardeform.coefficients import (
    GR_ONE,
    GR_ZERO,
    CoefficientError,
    GaussianRational,
    NonUnitError,
    Poly,
    RatFunc,
    coeff_eq,
    conjugate,
    derivative,
    format_coefficient,
    invert,
    is_zero,
)
from stardeform.parsing import ParseError, parse_coefficient

VARS = ("x", "p")


def P(text):
    return parse_coefficient(text, VARS)


# -- Gaussian rationals -------------------------------------------------------------

def test_gaussian_product_worked():
    # (2 + i)(3 - 2i) = 6 - 4i + 3i + 2 = 8 - i
    assert GaussianRational(2, 1) * GaussianRational(3, -2) == \
        GaussianRational(8, -1)


def test_gaussian_inverse_worked():
    # 1/(2 + i) = (2 - i)/5
    got = GaussianRational(2, 1).inverse()
    assert got == GaussianRational(Fraction(2, 5), Fraction(-1, 5))
    assert got * GaussianRational(2, 1) == GR_ONE


def test_gaussian_inverse_zero():
    with pytest.raises(NonUnitError):
        GR_ZERO.inverse()


def test_gaussian_conjugation_worked():
    assert GaussianRational(3, 4).conjugate() == GaussianRational(3, -4)
    assert GaussianRational(0, 1) * GaussianRational(0, 1) == \
        GaussianRational(-1)


gr = st.builds(
    lambda a, b, c, d: GaussianRational(Fraction(a, b), Fraction(c, d)),
    st.integers(-9, 9), st.integers(1, 9),
    st.integers(-9, 9), st.integers(1, 9))


@settings(max_examples=60, deadline=None)
@given(gr, gr, gr)
def test_gaussian_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a


@settings(max_examples=60, deadline=None)
@given(gr)
def test_gaussian_inverse_roundtrip(a):
    if a:
        assert a.inverse() * a == GR_ONE


@settings(max_examples=60, deadline=None)
@given(gr, gr)
def test_gaussian_conjugation_homomorphism(a, b):
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert (a + b).conjugate() == a.conjugate() + b.conjugate()
    assert a.conjugate().conjugate() == a


# -- polynomials --------------------------------------------------------------------

def test_poly_product_worked():
    # (x + p)(x - p) = x^2 - p^2
    assert coeff_eq(P("x + p") * P("x - p"), P("x^2 - p^2"))


def test_poly_powers_worked():
    assert coeff_eq(P("(x + 1)^3"), P("x^3 + 3*x^2 + 3*x + 1"))


def test_poly_derivative_worked():
    assert coeff_eq(P("x^2*p").derivative("x"), P("2*x*p"))
    assert coeff_eq(P("x^2*p").derivative("p"), P("x^2"))
    # a constant string demotes to a scalar; the helper still applies
    assert is_zero(derivative(P("3"), 0))


def test_scalar_derivative_is_zero():
    assert derivative(GaussianRational(5), 0) == GR_ZERO


def test_poly_conjugate_worked():
    # conjugation fixes the real variables and flips i
    assert coeff_eq(conjugate(P("x + i*p")), P("x - i*p"))


monomial_coeff = st.integers(-5, 5)


@st.composite
def polys(draw):
    out = Poly.const(VARS, GR_ZERO)
    x = Poly.variable(VARS, "x")
    p = Poly.variable(VARS, "p")
    for a in range(3):
        for b in range(3):
            c = draw(monomial_coeff)
            if c:
                out = out + Poly.const(VARS, GaussianRational(c)) * \
                    x ** a * p ** b
    return out


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), polys())
def test_poly_ring_axioms(f, g, h):
    assert coeff_eq((f + g) * h, f * h + g * h)
    assert coeff_eq((f * g) * h, f * (g * h))
    assert coeff_eq(f * g, g * f)


@settings(max_examples=40, deadline=None)
@given(polys(), polys())
def test_derivative_leibniz(f, g):
    for v in VARS:
        lhs = (f * g).derivative(v)
        rhs = f.derivative(v) * g + f * g.derivative(v)
        assert coeff_eq(lhs, rhs)


@settings(max_examples=40, deadline=None)
@given(polys())
def test_poly_format_parse_roundtrip(f):
    assert coeff_eq(parse_coefficient(format_coefficient(f), VARS), f)


# -- rational functions -------------------------------------------------------------

def test_ratfunc_cancellation():
    one = P("(1 + x^2)/(1 + x^2)")
    assert coeff_eq(one, P("1"))


def test_ratfunc_product_worked():
    got = P("(x)/(1 + p^2)") * P("(1 + p^2)/(x)")
    assert coeff_eq(got, P("1"))


def test_ratfunc_sum_worked():
    # 1/(1+x) + x/(1+x) = 1
    assert coeff_eq(P("(1)/(1 + x)") + P("(x)/(1 + x)"), P("1"))


def test_ratfunc_derivative_quotient_rule():
    f = P("(x)/(1 + x^2)")
    want = P("(1 - x^2)/((1 + x^2)^2)")
    assert coeff_eq(f.derivative("x"), want)


def test_ratfunc_conjugate():
    f = P("(x + i*p)/(1 + x^2)")
    assert coeff_eq(conjugate(f), P("(x - i*p)/(1 + x^2)"))


def test_invert_poly_lifts():
    f = invert(P("1 + x^2"))
    assert isinstance(f, RatFunc)
    assert coeff_eq(f * P("1 + x^2"), P("1"))


def test_invert_zero_raises():
    with pytest.raises(CoefficientError):
        invert(P("0"))


def test_invert_ratfunc():
    f = P("(x)/(1 + p^2)")
    assert coeff_eq(invert(f) * f, P("1"))


@settings(max_examples=25, deadline=None)
@given(polys(), polys())
def test_ratfunc_field_inverse(f, g):
    den = f * f + Poly.const(VARS, GR_ONE)
    q = RatFunc.from_num_den(g, den)
    r = q + P("(1)/(1 + x^2)")
    assert coeff_eq(r - q, P("(1)/(1 + x^2)"))


# -- grammar ------------------------------------------------------------------------

def test_parse_rational_and_i():
    assert parse_coefficient("3/4", ()) == GaussianRational(Fraction(3, 4))
    assert parse_coefficient("i", ()) == GaussianRational(0, 1)
    assert parse_coefficient("1/2 - 2*i", ()) == \
        GaussianRational(Fraction(1, 2), -2)


def test_parse_spec_example():
    f = parse_coefficient("(1)/(1 + x1^2 + x2^2)", ("x1", "x2"))
    g = parse_coefficient("1 + x1^2 + x2^2", ("x1", "x2"))
    assert coeff_eq(f * g, parse_coefficient("1", ("x1", "x2")))


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        P("1 + $")
    assert "column" in str(e.value)
    with pytest.raises(ParseError):
        P("x +")
    with pytest.raises(ParseError):
        P("(1 + x")
    with pytest.raises(ParseError):
        P("y")  # unknown symbol


def test_reserved_names_rejected():
    with pytest.raises(CoefficientError):
        parse_coefficient("l", ("l",))
    with pytest.raises(CoefficientError):
        parse_coefficient("i", ("i",))


def test_is_zero_helpers():
    assert is_zero(GR_ZERO)
    assert is_zero(P("0"))
    assert not is_zero(P("x"))
