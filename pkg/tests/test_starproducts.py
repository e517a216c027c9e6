"""Star products from cochain stacks, with the Weyl-ordered product on
the plane as the worked instance.

The oracle below recomputes the r-th product term from the textbook
formula with none of the engine's cochain machinery, so agreement is an
independent check rather than a reflexive one.
"""

import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stardeform.coefficients import (
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    Poly,
    coeff_eq,
    conjugate,
    is_zero,
)
from stardeform.fixtures import random_poly, validity_corpus
from stardeform.parsing import parse_coefficient
from stardeform.series import FormalSeries
from stardeform.starproducts import (
    Cochain,
    CochainStack,
    StarAlgebra,
    StarError,
    check_associativity,
    check_hermitian,
    check_unit,
    check_vey,
    moyal_algebra,
)

VARS = ("x", "p")
THETA = ((0, 1), (-1, 0))


def P(text):
    return parse_coefficient(text, VARS)


def oracle_term(f, g, r, theta=THETA):
    """(1/r!) (i/2)^r sum over index strings of prod theta * d^r f * d^r g."""
    if r == 0:
        return f * g
    scale = GaussianRational(0, Fraction(1, 2)) ** r * \
        GaussianRational(Fraction(1, math.factorial(r)))
    total = GR_ZERO
    d = len(VARS)
    for js in itertools.product(range(d), repeat=r):
        for ks in itertools.product(range(d), repeat=r):
            w = Fraction(1)
            for j, k in zip(js, ks):
                w *= theta[j][k]
                if not w:
                    break
            if not w:
                continue
            df, dg = f, g
            for j in js:
                df = df.derivative(j)
            for k in ks:
                dg = dg.derivative(k)
            if is_zero(df) or is_zero(dg):
                continue
            total = total + df * dg * GaussianRational(w)
    return total * scale


@pytest.fixture(scope="module")
def alg():
    return moyal_algebra(THETA, 4, VARS)


def test_worked_product_x_star_p(alg):
    got = alg.star(P("x"), P("p"))
    assert coeff_eq(got.coeffs[0], P("x*p"))
    assert coeff_eq(got.coeffs[1],
                    Poly.const(VARS, GaussianRational(0, Fraction(1, 2))))
    assert all(is_zero(c) for c in got.coeffs[2:])


def test_worked_commutator(alg):
    # x * p - p * x = i lambda
    comm = alg.star(P("x"), P("p")) - alg.star(P("p"), P("x"))
    assert coeff_eq(comm.coeffs[1], Poly.const(VARS, GaussianRational(0, 1)))
    assert is_zero(comm.coeffs[0])


def test_worked_product_x2_star_p2(alg):
    # x^2 * p^2 = x^2 p^2 + 2i x p l - (1/2) l^2
    got = alg.star(P("x^2"), P("p^2"))
    assert coeff_eq(got.coeffs[0], P("x^2*p^2"))
    assert coeff_eq(got.coeffs[1],
                    P("x*p") * GaussianRational(0, 2))
    assert coeff_eq(got.coeffs[2],
                    Poly.const(VARS, GaussianRational(Fraction(-1, 2))))
    assert all(is_zero(c) for c in got.coeffs[3:])


def test_cochains_match_textbook_formula(alg):
    rng = random.Random(20240)
    for _ in range(6):
        f = random_poly(rng, VARS, max_degree=3)
        g = random_poly(rng, VARS, max_degree=3)
        for r in range(4):
            assert coeff_eq(alg.cochain(r).apply(f, g),
                            oracle_term(f, g, r))


def test_star_matches_oracle_series(alg):
    rng = random.Random(77)
    f = random_poly(rng, VARS, max_degree=2)
    g = random_poly(rng, VARS, max_degree=2)
    got = alg.star(f, g)
    for r in range(alg.order + 1):
        assert coeff_eq(got.coeffs[r], oracle_term(f, g, r))


def test_unit_is_neutral(alg):
    rep = check_unit(alg, [P("x^2 + i*p"), P("x*p - 3")])
    assert rep.passed


def test_corpus_validity(alg):
    triples = validity_corpus(VARS)
    assert len(triples) == 20
    assert check_associativity(alg, triples).passed
    pairs = [(f, g) for f, g, _ in triples]
    assert check_hermitian(alg, pairs).passed
    assert check_vey(alg).passed


def test_hermitian_conjugation_law(alg):
    f, g = P("x + i*p"), P("x^2 - i")
    lhs = alg.star(f, g).conjugate()
    rhs = alg.star(conjugate(g), conjugate(f))
    assert lhs == rhs


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_associativity_property(seed):
    alg = moyal_algebra(THETA, 3, VARS)
    rng = random.Random(seed)
    triple = tuple(random_poly(rng, VARS, max_degree=2) for _ in range(3))
    assert check_associativity(alg, [triple]).passed


def test_negative_control_fails_at_order_two():
    # C1 = dx (x) dx: the lambda^2 associator defect is
    # f_xx g_x h_x - f_x g_x h_xx, so triples that are at most linear
    # in x slip through while (x^2, x, x) exposes it.
    bad_c1 = Cochain(2, ((GR_ONE, (1, 0), (1, 0)),))
    stack = CochainStack(2, [Cochain.pointwise(2), bad_c1, Cochain(2, ())])
    alg = StarAlgebra(VARS, stack, 2)
    quiet = check_associativity(alg, [(P("x"), P("x"), P("x*p"))])
    assert quiet.passed  # the defect needs a second derivative to show
    rep = check_associativity(alg, [(P("x^2"), P("x"), P("x"))])
    assert not rep.passed
    assert rep.first_failing_order() == 2


def test_vey_typing_violation_reported():
    # a first cochain with second derivatives violates a declared
    # differential-order typing of (0, 1)
    c1 = Cochain(2, ((GR_ONE, (2, 0), (0, 1)),))
    stack = CochainStack(2, [Cochain.pointwise(2), c1], vey_orders=(0, 1))
    alg = StarAlgebra(VARS, stack, 1)
    rep = check_vey(alg)
    assert not rep.passed
    assert rep.info["observed"][1] == (2, 1)
    # undeclared typing defaults to what is observed and passes
    assert check_vey(StarAlgebra(
        VARS, CochainStack(2, [Cochain.pointwise(2), c1]), 1)).passed


def test_zero_theta_is_pointwise():
    alg = moyal_algebra(((0, 0), (0, 0)), 3, VARS)
    f, g = P("x^2 + p"), P("x - i*p^2")
    got = alg.star(f, g)
    assert coeff_eq(got.coeffs[0], f * g)
    assert all(is_zero(c) for c in got.coeffs[1:])


def test_antisymmetric_theta_required_structurally():
    with pytest.raises(StarError):
        moyal_algebra(((0, 1), (1, 0)), 2, VARS)


def test_order_mismatch_between_stack_and_algebra():
    stack = CochainStack(2, [Cochain.pointwise(2)])
    with pytest.raises(StarError):
        StarAlgebra(VARS, stack, 2)


def test_series_inputs_promoted(alg):
    f = FormalSeries([P("x"), P("p"), GR_ZERO, GR_ZERO, GR_ZERO], 4)
    got = alg.star(f, P("p"))
    # classical part multiplies pointwise; the lambda tail distributes
    assert coeff_eq(got.coeffs[0], P("x*p"))
