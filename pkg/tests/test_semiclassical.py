"""Semiclassical layer: Poisson brackets, module brackets, the
projected flat connection, curvature agreement, and the fibred bracket
on the induced corner algebra.

The connection oracle below recomputes nabla = P0 d from scratch with
plain derivatives and grid products, independently of the engine's
ConnectionData plumbing.
"""

import random

import pytest

from stardeform.coefficients import (
    GR_ONE,
    GaussianRational,
    Poly,
    coeff_eq,
    conjugate,
    derivative,
    is_zero,
)
from stardeform.fixtures import (
    diag_projection,
    random_corner_grid,
    random_element,
    random_poly,
)
from stardeform.matrices import cgrid_eq, cgrid_is_zero, cgrid_scale
from stardeform.modules import DeformedModule, ModuleError
from stardeform.parsing import parse_coefficient
from stardeform.semiclassical import (
    ConnectionData,
    center_element,
    connection_curvature,
    corner_first_cochain_identity,
    fibred_bracket,
    hamiltonian_field,
    levi_civita,
    module_bracket,
    module_bracket_via_action,
    module_curvature,
    poisson_bracket,
    poisson_tensor,
    scale_element,
)
from stardeform.starproducts import StarError

VARS = ("x", "p")


def P(text):
    return parse_coefficient(text, VARS)


def X(text):
    return Poly.variable(VARS, text)


# -- Poisson structure --------------------------------------------------------------

def test_canonical_bracket_worked(alg_rat2):
    assert coeff_eq(poisson_bracket(alg_rat2, X("x"), X("p")), P("1"))
    assert coeff_eq(poisson_bracket(alg_rat2, X("x") * X("x"), X("p")),
                    P("2*x"))
    assert is_zero(poisson_bracket(alg_rat2, X("x"), X("x")))
    assert is_zero(poisson_bracket(alg_rat2, P("1"), X("p")))


def test_poisson_tensor_recovered(alg_rat2):
    theta = poisson_tensor(alg_rat2)
    assert theta[0][1] == GR_ONE
    assert theta[1][0] == -GR_ONE
    assert not theta[0][0] and not theta[1][1]


def test_poisson_tensor_rejects_higher_order():
    from stardeform.starproducts import (Cochain, CochainStack, StarAlgebra)
    c1 = Cochain(2, ((GR_ONE, (2, 0), (0, 1)),))
    alg = StarAlgebra(VARS, CochainStack(2, [Cochain.pointwise(2), c1]), 1)
    with pytest.raises(StarError):
        poisson_tensor(alg)


def test_hamiltonian_field_derives_bracket(alg_rat2):
    rng = random.Random(30)
    for _ in range(4):
        f = random_poly(rng, VARS, max_degree=2)
        g = random_poly(rng, VARS, max_degree=2)
        xf = hamiltonian_field(alg_rat2, f)
        directional = sum((xf[j] * derivative(g, j) for j in range(2)),
                          start=Poly.const(VARS, GaussianRational(0)))
        assert coeff_eq(directional, poisson_bracket(alg_rat2, g, f))


def test_bracket_laws_seeded(alg_rat2):
    rng = random.Random(31)
    br = lambda a, b: poisson_bracket(alg_rat2, a, b)
    for _ in range(5):
        f = random_poly(rng, VARS, max_degree=2)
        g = random_poly(rng, VARS, max_degree=2)
        h = random_poly(rng, VARS, max_degree=2)
        assert is_zero(br(f, g) + br(g, f))
        assert coeff_eq(br(f, g * h), br(f, g) * h + br(f, h) * g)
        assert is_zero(br(f, br(g, h)) + br(g, br(h, f)) + br(h, br(f, g)))
        assert coeff_eq(conjugate(br(f, g)),
                        br(conjugate(f), conjugate(g)))


# -- module bracket -----------------------------------------------------------------

def test_module_bracket_routes_agree(bott_module2):
    dm = bott_module2
    rng = random.Random(32)
    for _ in range(4):
        x = random_element(rng, dm)
        f = random_poly(rng, VARS, max_degree=2)
        assert module_bracket(dm, x, f) == \
            module_bracket_via_action(dm, x, f)


def test_module_bracket_leibniz(bott_module2):
    dm, alg = bott_module2, bott_module2.alg
    rng = random.Random(33)
    for _ in range(4):
        x = random_element(rng, dm)
        f = random_poly(rng, VARS, max_degree=2)
        g = random_poly(rng, VARS, max_degree=2)
        lhs = module_bracket(dm, scale_element(x, g), f)
        rhs = scale_element(module_bracket(dm, x, f), g) + \
            scale_element(x, poisson_bracket(alg, g, f))
        assert lhs == rhs
        lhs = module_bracket(dm, x, f * g)
        rhs = scale_element(module_bracket(dm, x, f), g) + \
            scale_element(module_bracket(dm, x, g), f)
        assert lhs == rhs


def test_module_bracket_constant_vanishes(bott_module2):
    dm = bott_module2
    rng = random.Random(34)
    x = random_element(rng, dm)
    assert module_bracket(dm, x, GR_ONE).is_zero


def test_module_bracket_needs_skew_first_cochain():
    from stardeform.starproducts import (Cochain, CochainStack, StarAlgebra)
    c1 = Cochain(2, ((GR_ONE, (1, 0), (1, 0)),))
    alg = StarAlgebra(VARS, CochainStack(
        2, [Cochain.pointwise(2), c1, Cochain(2, ())]), 2,
        coeff_kind="ratfunc")
    dm = DeformedModule.build(alg, diag_projection((1, 0)))
    with pytest.raises(StarError):
        module_bracket(dm, dm.basis()[0], P("x"))


# -- connection and curvature -------------------------------------------------------

def oracle_nabla(dm, x_field, col):
    """P0 (X . d(col)) with no engine connection code."""
    out = []
    for c in col:
        acc = Poly.const(VARS, GaussianRational(0))
        for j, comp in enumerate(x_field):
            acc = acc + comp * derivative(c, j)
        out.append(acc)
    p0 = dm.p0_grid
    return tuple(sum((p0[i][j] * out[j] for j in range(dm.n)),
                     start=Poly.const(VARS, GaussianRational(0)))
                 for i in range(dm.n))


def test_nabla_matches_oracle(bott_module2):
    dm, alg = bott_module2, bott_module2.alg
    cd = ConnectionData(dm)
    rng = random.Random(35)
    for _ in range(3):
        f = random_poly(rng, VARS, max_degree=2)
        xf = hamiltonian_field(alg, f)
        x = random_element(rng, dm)
        got = levi_civita(cd, xf, x)
        want = oracle_nabla(dm, xf, x.classical_column())
        assert all(coeff_eq(u, v) for u, v in
                   zip(got.classical_column(), want))


def test_nabla_hamiltonian_equals_module_bracket(bott_module2):
    dm, alg = bott_module2, bott_module2.alg
    cd = ConnectionData(dm)
    rng = random.Random(36)
    for f in (X("x"), X("p"), X("x") * X("p"),
              random_poly(rng, VARS, max_degree=2)):
        xf = hamiltonian_field(alg, f)
        for e in dm.basis():
            assert levi_civita(cd, xf, e) == module_bracket(dm, e, f)


def test_curvature_agreement_on_bott(bott_module2):
    dm, alg = bott_module2, bott_module2.alg
    cd = ConnectionData(dm)
    for f, g in ((X("x"), X("p")), (X("x") * X("x"), X("p")),
                 (X("x"), X("x") * X("p"))):
        xf = hamiltonian_field(alg, f)
        xg = hamiltonian_field(alg, g)
        for e in dm.basis():
            assert module_curvature(dm, f, g, e) == \
                connection_curvature(cd, xf, xg, e)


def test_curvature_golden_value(bott_module2):
    # R(x, p) applied to the first basis column, frozen as a regression
    # anchor after cross-checking the two independent curvature routes
    dm = bott_module2
    got = module_curvature(dm, X("x"), X("p"), dm.basis()[0])
    want0 = P("(-2*i)/((1 + x^2 + p^2)^3)")
    want1 = P("(-2*i*x + 2*p)/((1 + x^2 + p^2)^3)")
    col = got.classical_column()
    assert coeff_eq(col[0], want0)
    assert coeff_eq(col[1], want1)
    assert not got.is_zero


def test_curvature_antisymmetry_and_flat_case(bott_module2, alg_rat2):
    dm = bott_module2
    assert module_curvature(dm, X("x"), X("x"), dm.basis()[0]).is_zero
    flat = DeformedModule.build(alg_rat2, diag_projection((1, 0)))
    for f, g in ((X("x"), X("p")), (X("x") * X("p"), X("p"))):
        for e in flat.basis():
            assert module_curvature(flat, f, g, e).is_zero


def test_curvature_vanishes_on_constants(bott_module2):
    dm = bott_module2
    one = Poly.const(VARS, GR_ONE)
    for e in dm.basis():
        assert module_curvature(dm, one, X("p"), e).is_zero
        assert module_curvature(dm, X("x"), one, e).is_zero


# -- fibred bracket on the corner ---------------------------------------------------

def test_fibred_center_law(bott_module2):
    dm, alg = bott_module2, bott_module2.alg
    rng = random.Random(37)
    for _ in range(3):
        f = random_poly(rng, VARS, max_degree=2)
        g = random_poly(rng, VARS, max_degree=2)
        got = fibred_bracket(dm, center_element(dm, f),
                             center_element(dm, g))
        want = center_element(dm, poisson_bracket(alg, f, g))
        assert cgrid_eq(got, want)


def test_fibred_constant_center_vanishes(bott_module2):
    dm = bott_module2
    rng = random.Random(38)
    l0 = random_corner_grid(rng, dm)
    one = Poly.const(VARS, GR_ONE)
    assert cgrid_is_zero(fibred_bracket(dm, l0, center_element(dm, one)))


def test_fibred_bracket_routes_cross_checked(bott_module2):
    # fibred_bracket raises if its two computation routes disagree, so a
    # plain call on generic corner arguments is itself the assertion
    dm = bott_module2
    rng = random.Random(39)
    for _ in range(3):
        l0 = random_corner_grid(rng, dm)
        f = random_poly(rng, VARS, max_degree=2)
        fibred_bracket(dm, l0, center_element(dm, f))


def test_corner_first_cochain_identity(bott_module2):
    dm = bott_module2
    rng = random.Random(40)
    for _ in range(3):
        a = random_corner_grid(rng, dm)
        b = random_corner_grid(rng, dm)
        assert corner_first_cochain_identity(dm, a, b)


def test_fibred_bracket_rejects_non_corner(bott_module2):
    dm = bott_module2
    one = diag_projection((1, 1))
    with pytest.raises(ModuleError):
        fibred_bracket(dm, one, cgrid_scale(dm.p0_grid, P("x")))
