"""Strong fullness witnesses, their deformations, and the rank-one
operator identities that drive the Morita picture."""

import random

import pytest

from stardeform.coefficients import (
    GR_ONE,
    GaussianRational,
    coeff_eq,
    is_zero,
)
from stardeform.fixtures import diag_projection, random_element
from stardeform.modules import DeformedModule, ModuleError
from stardeform.morita import (
    ThetaOperator,
    canonical_inner,
    deform_full_witness,
    nice_identities_classical,
    nice_identities_deformed,
    strongly_full_classical,
    strongly_full_deformed,
    theta_adjointability,
    verify_nice_identities,
    verify_strongly_full,
)
from stardeform.parsing import parse_coefficient

VARS = ("x", "p")


def P(text):
    return parse_coefficient(text, VARS)


# -- classical fullness -------------------------------------------------------------

def test_bott_is_strongly_full_with_unit_witness(bott_grid):
    rep = strongly_full_classical(bott_grid, GR_ONE)
    assert rep.passed


def test_diag11_fails_with_unit_witness():
    rep = strongly_full_classical(diag_projection((1, 1)), GR_ONE)
    assert not rep.passed
    # tr P0 = 2, so the residual 2 . 1 . 1 - 1 = 1 is reported
    assert rep.failures[0].detail == "residual 1"


def test_diag11_passes_with_corrected_witness():
    from fractions import Fraction

    # tr P0 = 2 wants tau tau* = 1/2; tau = 1/2 + i/2 has norm 1/2
    tau = GaussianRational(Fraction(1, 2), Fraction(1, 2))
    rep = strongly_full_classical(diag_projection((1, 1)), tau)
    assert rep.passed


def test_rank_one_diag_full(alg_rat3):
    rep = strongly_full_classical(diag_projection((1, 0)), GR_ONE)
    assert rep.passed


def test_dispatcher_accepts_grid_or_module(bott_module, bott_grid):
    assert verify_strongly_full(bott_grid, GR_ONE).passed
    tau = deform_full_witness(bott_module, GR_ONE)
    assert verify_strongly_full(bott_module, tau).passed


# -- deformed witness ---------------------------------------------------------------

def test_deformed_witness_on_bott(bott_module):
    dm = bott_module
    tau = deform_full_witness(dm, GR_ONE)
    assert strongly_full_deformed(dm, tau).passed
    # frozen expansion, regression anchor (engine-produced, then checked
    # against the defining identity above)
    assert coeff_eq(tau.coeffs[0], P("1"))
    assert coeff_eq(tau.coeffs[1], P("(-1)/((1 + x^2 + p^2)^2)"))
    assert coeff_eq(tau.coeffs[2], P("(3/2)/((1 + x^2 + p^2)^4)"))
    assert coeff_eq(
        tau.coeffs[3],
        P("(-6*x^4 - 12*x^2*p^2 - 20*x^2 - 6*p^4 - 20*p^2 + 7/2)"
          "/((1 + x^2 + p^2)^6)"))


def test_classical_witness_alone_fails_deformed(bott_module):
    dm = bott_module
    tau = dm.alg.series(GR_ONE)
    rep = strongly_full_deformed(dm, tau)
    assert not rep.passed
    assert rep.first_failing_order() == 1


def test_deform_witness_requires_classical_validity(bott_module):
    with pytest.raises(ModuleError):
        deform_full_witness(bott_module, GaussianRational(2))


def test_witness_deformation_degenerates(alg_zero3, bott_grid):
    dm = DeformedModule.build(alg_zero3, bott_grid)
    tau = deform_full_witness(dm, GR_ONE)
    assert coeff_eq(tau.coeffs[0], GR_ONE) or is_zero(tau.coeffs[0] - GR_ONE)
    assert all(is_zero(c) for c in tau.coeffs[1:])


# -- nice identities ----------------------------------------------------------------

def test_nice_identities_classical_bott(bott_module):
    dm = bott_module
    rng = random.Random(50)
    pairs = [(x, y) for x in dm.basis() for y in dm.basis()]
    pairs += [(random_element(rng, dm), random_element(rng, dm))
              for _ in range(2)]
    assert nice_identities_classical(dm, GR_ONE, pairs).passed


def test_nice_identities_deformed_bott(bott_module):
    dm = bott_module
    tau = deform_full_witness(dm, GR_ONE)
    rng = random.Random(51)
    pairs = [(x, y) for x in dm.basis() for y in dm.basis()]
    pairs += [(random_element(rng, dm), random_element(rng, dm))
              for _ in range(2)]
    assert nice_identities_deformed(dm, tau, pairs).passed


def test_nice_identities_detect_bad_witness(bott_module):
    dm = bott_module
    pairs = [(dm.basis()[0], dm.basis()[0])]
    bad = dm.alg.series(GR_ONE)  # not deformation-corrected
    rep = nice_identities_deformed(dm, bad, pairs)
    assert not rep.passed


def test_nice_identities_constant_fixture(alg_rat3):
    dm = DeformedModule.build(alg_rat3, diag_projection((1, 0)))
    pairs = [(x, y) for x in dm.basis() for y in dm.basis()]
    assert nice_identities_classical(dm, GR_ONE, pairs).passed
    tau = deform_full_witness(dm, GR_ONE)
    assert nice_identities_deformed(dm, tau, pairs).passed


def test_verify_dispatcher(bott_module):
    dm = bott_module
    pairs = [(dm.basis()[0], dm.basis()[1])]
    assert verify_nice_identities(dm, GR_ONE, pairs, deformed=False).passed
    tau = deform_full_witness(dm, GR_ONE)
    assert verify_nice_identities(dm, tau, pairs, deformed=True).passed


# -- theta operators ----------------------------------------------------------------

def test_theta_operator_classical_form(bott_module):
    dm = bott_module
    rng = random.Random(52)
    x, y, z = (random_element(rng, dm) for _ in range(3))
    op = ThetaOperator(dm, x, y)
    got = op.apply_classical(z)
    # x . h0(y, z) componentwise
    h0 = dm.classical_metric(y, z)
    want = tuple(c * h0 for c in x.classical_column())
    assert all(coeff_eq(u, v) for u, v in
               zip(got.classical_column(), want))


def test_theta_adjointability(bott_module):
    dm = bott_module
    rng = random.Random(53)
    for _ in range(3):
        x, y, z, w = (random_element(rng, dm) for _ in range(4))
        assert theta_adjointability(dm, x, y, z, w).passed
    # degenerate corners of the identity
    e = dm.basis()[0]
    assert theta_adjointability(dm, e, e, e, e).passed
    assert theta_adjointability(dm, e, e, dm.zero_element(), e).passed


def test_theta_adjoint_swaps_arguments(bott_module):
    dm = bott_module
    rng = random.Random(54)
    x, y = random_element(rng, dm), random_element(rng, dm)
    op = ThetaOperator(dm, x, y)
    adj = op.adjoint()
    assert adj.x == y and adj.y == x


def test_canonical_inner_length_mismatch(bott_module):
    dm, alg = bott_module, bott_module.alg
    with pytest.raises(ModuleError):
        canonical_inner(alg, (alg.one(),), (alg.one(), alg.one()))
