"""Strong fullness, rank-one operators, and the fullness identities.

A projection is strongly full when its trace is the inverse of tau tau*
for an invertible witness tau.  The engine never synthesizes a witness
(square roots of integer traces do not exist in the coefficient field);
it verifies supplied witnesses, deforms a valid classical witness order
by order, and checks the two operator identities (here NiceI and
NiceII) that make the module an equivalence bimodule.
"""

from .coefficients import (
    GR_ONE,
    GR_ZERO,
    conjugate as coeff_conjugate,
    format_coefficient,
    invert,
    is_zero as coeff_is_zero,
)
from .series import FormalSeries
from .starproducts import CheckFailure, CheckReport, StarAlgebra
from .matrices import cgrid_trace
from .modules import DeformedModule, ModuleElement, ModuleError, col_inner
from .semiclassical import classical_column, scale_element


def canonical_inner(alg: StarAlgebra, x, y) -> FormalSeries:
    """<x, y> = sum_i conj(x_i) * y_i on equal-length series columns."""
    if len(x) != len(y):
        raise ModuleError("inner product needs columns of equal length")
    return col_inner(alg, x, y)


def classical_inner(x_col, y_col):
    """Pointwise <x, y> on coefficient columns."""
    if len(x_col) != len(y_col):
        raise ModuleError("inner product needs columns of equal length")
    acc = GR_ZERO
    for a, b in zip(x_col, y_col):
        acc = acc + coeff_conjugate(a) * b
    return acc


class ThetaOperator:
    """The rank-one-type operator z -> x . h(y, z)."""

    def __init__(self, dm: DeformedModule, x: ModuleElement, y: ModuleElement):
        self.dm = dm
        self.x = x
        self.y = y

    def apply(self, z: ModuleElement) -> ModuleElement:
        """Deformed action and metric."""
        return self.dm.act(self.x, self.dm.metric(self.y, z))

    def apply_classical(self, z: ModuleElement) -> ModuleElement:
        """Pointwise product and classical metric."""
        return scale_element(self.x, self.dm.classical_metric(self.y, z))

    def adjoint(self) -> "ThetaOperator":
        return ThetaOperator(self.dm, self.y, self.x)


# -- strong fullness ---------------------------------------------------------------

def strongly_full_classical(p0_grid, tau0) -> CheckReport:
    """Check tr P0 . tau0 . conj(tau0) = 1 exactly."""
    residual = cgrid_trace(p0_grid) * tau0 * coeff_conjugate(tau0) - GR_ONE
    failures = []
    if not coeff_is_zero(residual):
        failures.append(CheckFailure(
            "tr P0 . tau tau* - 1", 0,
            f"residual {format_coefficient(residual)}"))
    return CheckReport("strongly_full_classical", failures)


def strongly_full_deformed(dm: DeformedModule, tau: FormalSeries) -> CheckReport:
    """Check conj(tau) * Str(P) * tau = 1 to the truncation order."""
    alg = dm.alg
    tau = alg.series(tau)
    residual = alg.star(alg.star(tau.conjugate(), dm.p.star_trace()),
                        tau) - alg.one()
    failures = []
    if not residual.is_zero:
        k = residual.first_nonzero_order()
        failures.append(CheckFailure(
            "tau* Str(P) tau - 1", k,
            f"residual {format_coefficient(residual.coeffs[k])}"))
    return CheckReport("strongly_full_deformed", failures)


def verify_strongly_full(target, tau) -> CheckReport:
    """Dispatch on a classical grid or a deformed module."""
    if isinstance(target, DeformedModule):
        return strongly_full_deformed(target, tau)
    return strongly_full_classical(target, tau)


def deform_full_witness(dm: DeformedModule, tau0) -> FormalSeries:
    """Extend a valid classical witness to one for the deformed trace.

    Order recursion on the defect d = 1 - tau* Str(P) tau: the defect is
    Hermitian, so its leading coefficient d_k is self-conjugate and
    tau_k = (1/2) d_k tau0 cancels it (using tr P0 . tau0 conj(tau0) = 1).
    """
    dm._require_hermitian("witness deformation")
    alg = dm.alg
    if not strongly_full_classical(dm.p0_grid, tau0).passed:
        raise ModuleError("classical witness is not valid")
    t = dm.p.star_trace()
    tau = alg.series(tau0)
    while True:
        defect = alg.one() - alg.star(alg.star(tau.conjugate(), t), tau)
        k = defect.first_nonzero_order()
        if k is None:
            return tau
        d_k = defect.coeffs[k]
        half = d_k * tau0 * invert(2)
        tau = tau + FormalSeries(
            [GR_ZERO] * k + [half] + [GR_ZERO] * (alg.order - k), alg.order)


# -- the fullness identities --------------------------------------------------------

def _witness_columns_classical(dm: DeformedModule, tau0):
    """The spanning elements P0 e_i tau0."""
    return tuple(scale_element(e, tau0) for e in dm.basis())


def _witness_columns_deformed(dm: DeformedModule, tau: FormalSeries):
    """Image columns Xi_i = P * e_i * tau; these are I of the deformed
    spanning elements, so identities checked on them decide the module
    identities (I is injective)."""
    alg = dm.alg
    tau = alg.series(tau)
    return tuple(
        tuple(alg.star(dm.p.entry(k, i), tau) for k in range(dm.n))
        for i in range(dm.n))


def nice_identities_classical(dm: DeformedModule, tau0, samples) -> CheckReport:
    """NiceII: sum_i h0(xi_i, xi_i) = 1.  NiceI: for each sample pair
    (x, y), sum_i Theta_{x, xi_i} Theta_{xi_i, y} = Theta_{x, y}, decided
    on the spanning set P0 e_j."""
    failures = []
    xis = _witness_columns_classical(dm, tau0)
    total = GR_ZERO
    for xi in xis:
        total = total + dm.classical_metric(xi, xi)
    if not coeff_is_zero(total - GR_ONE):
        failures.append(CheckFailure("NiceII", 0,
                                     f"sum {format_coefficient(total)}"))
    basis = dm.basis()
    for s, (x, y) in enumerate(samples):
        want_op = ThetaOperator(dm, x, y)
        for j, w in enumerate(basis):
            want = want_op.apply_classical(w)
            got = None
            for xi in xis:
                step = ThetaOperator(dm, x, xi).apply_classical(
                    ThetaOperator(dm, xi, y).apply_classical(w))
                got = step if got is None else got + step
            if got != want:
                failures.append(CheckFailure(
                    f"NiceI sample {s}", 0, f"basis index {j}"))
    return CheckReport("nice_identities_classical", failures)


def nice_identities_deformed(dm: DeformedModule, tau: FormalSeries,
                             samples) -> CheckReport:
    """The same two identities with the deformed product, metric, and
    action, decided entirely in the image of I.

    With capital letters for image columns, Theta_{u,v} acts there as
    W -> U * <V, W>, so the NiceI comparison on the spanning set I(P0 e_j)
    needs only star products; no inverse of I enters.
    """
    dm._require_hermitian("the fullness identities")
    alg = dm.alg
    failures = []
    xis = _witness_columns_deformed(dm, tau)
    total = alg.zero()
    for xi in xis:
        total = total + canonical_inner(alg, xi, xi)
    diff = total - alg.one()
    if not diff.is_zero:
        failures.append(CheckFailure(
            "NiceII", diff.first_nonzero_order(), "sum differs from 1"))
    basis_u = dm.iso_basis()
    for s, (x, y) in enumerate(samples):
        a = dm.iso(x)
        b = dm.iso(y)
        for j, w in enumerate(basis_u):
            bw = canonical_inner(alg, b, w)
            want = tuple(alg.star(c, bw) for c in a)
            got = None
            for xi in xis:
                inner = canonical_inner(
                    alg, xi, tuple(alg.star(c, bw) for c in xi))
                step = tuple(alg.star(c, inner) for c in a)
                got = step if got is None else \
                    tuple(u + v for u, v in zip(got, step))
            bad = next((r for r in range(alg.order + 1)
                        if any(not coeff_is_zero(u.coeffs[r] - v.coeffs[r])
                               for u, v in zip(got, want))), None)
            if bad is not None:
                failures.append(CheckFailure(
                    f"NiceI sample {s}", bad, f"basis index {j}"))
    return CheckReport("nice_identities_deformed", failures)


def verify_nice_identities(dm: DeformedModule, tau, samples,
                           deformed: bool = True) -> CheckReport:
    if deformed:
        return nice_identities_deformed(dm, tau, samples)
    return nice_identities_classical(dm, tau, samples)


def theta_adjointability(dm: DeformedModule, x: ModuleElement,
                         y: ModuleElement, z: ModuleElement,
                         w: ModuleElement) -> CheckReport:
    """Check h(Theta_{x,y} z, w) = h(z, Theta_{y,x} w) exactly."""
    op = ThetaOperator(dm, x, y)
    lhs = dm.metric(op.apply(z), w)
    rhs = dm.metric(z, op.adjoint().apply(w))
    failures = []
    diff = lhs - rhs
    if not diff.is_zero:
        failures.append(CheckFailure(
            "adjointability", diff.first_nonzero_order(),
            "h(Theta z, w) differs from h(z, Theta* w)"))
    return CheckReport("theta_adjointability", failures)
