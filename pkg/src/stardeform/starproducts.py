"""Star products defined by stacks of bidifferential cochains.

A product is the data of cochains C_0..C_N with C_0 the pointwise product;
two series multiply by (f*g)_r = sum over s+t+u=r of C_u(f_s, g_t).  Each
cochain is a finite sum of terms w * (d^L f)(d^R g) with an exact scalar
weight w and per-variable derivative multi-indices L, R.

The constant Poisson tensor product on R^d is built here explicitly; any
other stack can be supplied term by term.  Nothing in this module assumes
associativity: the checkers verify it order by order on samples and report
the first failing order, which is also how deliberately broken stacks are
diagnosed.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial

from .coefficients import (
    CoefficientError,
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    derivative as coeff_derivative,
    invert as coeff_invert,
    is_zero as coeff_is_zero,
    Poly,
    variables_of,
)
from .series import FormalSeries, SeriesError


class StarError(CoefficientError):
    pass


def multi_derivative(c, multi):
    """Iterated partial derivative by a per-variable count vector."""
    for i, k in enumerate(multi):
        for _ in range(k):
            c = coeff_derivative(c, i)
            if isinstance(c, GaussianRational):
                return GR_ZERO if not c else c
    return c


class Cochain:
    """One bidifferential cochain: a sum of weighted derivative pairs."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms):
        clean = {}
        for weight, left, right in terms:
            left, right = tuple(left), tuple(right)
            if len(left) != nvars or len(right) != nvars:
                raise StarError("cochain term has wrong multi-index length")
            if not isinstance(weight, GaussianRational):
                weight = GaussianRational(weight)
            if not weight:
                continue
            key = (left, right)
            acc = clean.get(key, GR_ZERO) + weight
            if acc:
                clean[key] = acc
            else:
                clean.pop(key, None)
        self.nvars = nvars
        self.terms = tuple((w, lr[0], lr[1]) for lr, w in
                           sorted(clean.items(), key=lambda kv: kv[0]))

    @classmethod
    def pointwise(cls, nvars: int) -> "Cochain":
        z = (0,) * nvars
        return cls(nvars, ((GR_ONE, z, z),))

    def apply(self, f, g):
        total = GR_ZERO
        for w, left, right in self.terms:
            df = multi_derivative(f, left)
            if coeff_is_zero(df):
                continue
            dg = multi_derivative(g, right)
            if coeff_is_zero(dg):
                continue
            total = total + w * (df * dg)
        return total

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def max_orders(self) -> tuple[int, int]:
        """Largest derivative order in the left and right argument."""
        if not self.terms:
            return 0, 0
        return (max(sum(l) for _, l, _ in self.terms),
                max(sum(r) for _, _, r in self.terms))

    def is_skew(self) -> bool:
        """Structurally C(f, g) == -C(g, f)."""
        table = {(l, r): w for w, l, r in self.terms}
        for (l, r), w in table.items():
            if table.get((r, l), GR_ZERO) != -w:
                return False
        return True

    def _weight_table(self):
        return {(l, r): w for w, l, r in self.terms}

    def transpose(self) -> "Cochain":
        return Cochain(self.nvars, ((w, r, l) for w, l, r in self.terms))


class CochainStack:
    """Cochains C_0..C_N plus declared structural metadata."""

    __slots__ = ("nvars", "cochains", "hermitian_flag", "vey_orders")

    def __init__(self, nvars: int, cochains, hermitian_flag=None,
                 vey_orders=None):
        cochains = tuple(cochains)
        if not cochains:
            raise StarError("a stack needs at least C_0")
        if cochains[0].terms != Cochain.pointwise(nvars).terms:
            raise StarError("C_0 must be the pointwise product")
        self.nvars = nvars
        self.cochains = cochains
        if hermitian_flag is None:
            hermitian_flag = self._structural_hermitian()
        self.hermitian_flag = bool(hermitian_flag)
        if vey_orders is None:
            vey_orders = tuple(max(c.max_orders()) for c in cochains)
        vey_orders = tuple(vey_orders)
        if len(vey_orders) != len(cochains):
            raise StarError("vey_orders must list one order per cochain")
        self.vey_orders = vey_orders

    @property
    def order(self) -> int:
        return len(self.cochains) - 1

    def _structural_hermitian(self) -> bool:
        # conj(C_r(f,g)) == C_r(conj g, conj f) for all f, g iff the
        # weight table satisfies W(R,L) == conj(W(L,R)).
        for c in self.cochains:
            table = c._weight_table()
            for (l, r), w in table.items():
                if table.get((r, l), GR_ZERO) != w.conjugate():
                    return False
        return True


def moyal_stack(theta, order: int, nvars: int | None = None) -> CochainStack:
    """Constant-coefficient exponential-type stack for a Poisson tensor.

    C_r(f,g) = (1/r!) (i/2)^r theta^{a1 b1} .. theta^{ar br}
               (d_{a1..ar} f)(d_{b1..br} g),
    with all contractions expanded exactly.
    """
    theta = tuple(tuple(Fraction(x) for x in row) for row in theta)
    d = len(theta) if nvars is None else nvars
    if len(theta) != d or any(len(row) != d for row in theta):
        raise StarError("theta must be a square matrix over the variables")
    for a in range(d):
        for b in range(d):
            if theta[a][b] != -theta[b][a]:
                raise StarError("theta must be antisymmetric")
    base: dict = {}
    for a in range(d):
        for b in range(d):
            if theta[a][b]:
                la = tuple(1 if j == a else 0 for j in range(d))
                rb = tuple(1 if j == b else 0 for j in range(d))
                base[(la, rb)] = base.get((la, rb), Fraction(0)) + theta[a][b]
    cochains = [Cochain.pointwise(d)]
    power: dict = {((0,) * d, (0,) * d): Fraction(1)}
    i_phase = (GaussianRational(1), GaussianRational(0, 1),
               GaussianRational(-1), GaussianRational(0, -1))
    for r in range(1, order + 1):
        nxt: dict = {}
        for (l1, r1), w1 in power.items():
            for (l2, r2), w2 in base.items():
                key = (tuple(a + b for a, b in zip(l1, l2)),
                       tuple(a + b for a, b in zip(r1, r2)))
                nxt[key] = nxt.get(key, Fraction(0)) + w1 * w2
        power = {k: v for k, v in nxt.items() if v}
        scale = Fraction(1, factorial(r) * 2 ** r)
        phase = i_phase[r % 4]
        cochains.append(Cochain(
            d, ((phase * (w * scale), l, r) for (l, r), w in power.items())))
    return CochainStack(d, cochains, vey_orders=tuple(range(order + 1)))


class StarAlgebra:
    """A coefficient algebra together with a cochain stack and order."""

    __slots__ = ("variables", "coeff_kind", "stack", "order", "theta")

    def __init__(self, variables, stack: CochainStack, order: int,
                 coeff_kind: str = "poly", theta=None):
        variables = tuple(variables)
        if stack.nvars != len(variables):
            raise StarError("stack dimension does not match variables")
        if stack.order < order:
            raise StarError(
                f"stack provides cochains up to order {stack.order}, "
                f"needs {order}")
        if coeff_kind not in ("poly", "ratfunc"):
            raise StarError(f"unknown coefficient kind {coeff_kind!r}")
        self.variables = variables
        self.stack = stack
        self.order = order
        self.coeff_kind = coeff_kind
        self.theta = theta

    # -- series plumbing ----------------------------------------------------

    def series(self, c) -> FormalSeries:
        """Lift a coefficient (or list of them) to a series of this order."""
        if isinstance(c, FormalSeries):
            if c.order != self.order:
                raise SeriesError(
                    f"series order {c.order} does not match algebra "
                    f"order {self.order}")
            out = c
        elif isinstance(c, (list, tuple)):
            coeffs = list(c) + [GR_ZERO] * (self.order + 1 - len(c))
            out = FormalSeries(coeffs[: self.order + 1], self.order)
        else:
            out = FormalSeries.const(c, self.order)
        for x in out.coeffs:
            v = variables_of(x)
            if v and v != self.variables:
                raise StarError(
                    f"coefficient over variables {v} does not live in the "
                    f"algebra over {self.variables}")
        return out

    def one(self) -> FormalSeries:
        return FormalSeries.const(GR_ONE, self.order)

    def zero(self) -> FormalSeries:
        return FormalSeries.zero(self.order)

    def var(self, name: str) -> FormalSeries:
        return self.series(Poly.variable(self.variables, name))

    def invert_coefficient(self, c):
        if self.coeff_kind == "poly" and isinstance(c, Poly) \
                and not c.is_constant:
            raise CoefficientError(
                "classical part is not a unit in the polynomial algebra")
        return coeff_invert(c)

    # -- the product ---------------------------------------------------------

    def cochain(self, r: int) -> Cochain:
        return self.stack.cochains[r]

    def star(self, f, g) -> FormalSeries:
        f = self.series(f)
        g = self.series(g)
        n = self.order
        cochains = self.stack.cochains
        out = []
        for r in range(n + 1):
            total = GR_ZERO
            for s in range(r + 1):
                fs = f.coeffs[s]
                if coeff_is_zero(fs):
                    continue
                for t in range(r - s + 1):
                    gt = g.coeffs[t]
                    if coeff_is_zero(gt):
                        continue
                    term = cochains[r - s - t].apply(fs, gt)
                    if not coeff_is_zero(term):
                        total = total + term
            out.append(total)
        return FormalSeries(out, n)


def moyal_algebra(theta, order: int, variables=None,
                  coeff_kind: str = "poly") -> StarAlgebra:
    theta = tuple(tuple(Fraction(x) for x in row) for row in theta)
    d = len(theta)
    if variables is None:
        variables = tuple(f"x{j + 1}" for j in range(d))
    return StarAlgebra(variables, moyal_stack(theta, order), order,
                       coeff_kind=coeff_kind, theta=theta)


# -- validity checks ---------------------------------------------------------

class CheckFailure:
    __slots__ = ("sample", "order", "detail")

    def __init__(self, sample, order, detail=""):
        self.sample = sample
        self.order = order
        self.detail = detail

    def __repr__(self):
        return f"CheckFailure(sample={self.sample}, order={self.order})"


class CheckReport:
    __slots__ = ("name", "failures", "info")

    def __init__(self, name, failures=(), info=None):
        self.name = name
        self.failures = tuple(failures)
        self.info = info or {}

    @property
    def passed(self) -> bool:
        return not self.failures

    def first_failing_order(self) -> int | None:
        orders = [f.order for f in self.failures if f.order is not None]
        return min(orders) if orders else None

    def __repr__(self):
        state = "pass" if self.passed else f"{len(self.failures)} failures"
        return f"CheckReport({self.name}: {state})"


def check_associativity(alg: StarAlgebra, triples) -> CheckReport:
    """(f*g)*h == f*(g*h) exactly, per sample triple and lambda order."""
    failures = []
    for idx, (f, g, h) in enumerate(triples):
        left = alg.star(alg.star(f, g), h)
        right = alg.star(f, alg.star(g, h))
        r = left.first_difference(right)
        if r is not None:
            failures.append(CheckFailure(idx, r, "associator is nonzero"))
    return CheckReport("associativity", failures)


def check_hermitian(alg: StarAlgebra, pairs) -> CheckReport:
    """conj(f*g) == conj(g) * conj(f) exactly, per sample pair."""
    failures = []
    for idx, (f, g) in enumerate(pairs):
        left = alg.star(f, g).conjugate()
        right = alg.star(alg.series(g).conjugate(),
                         alg.series(f).conjugate())
        r = left.first_difference(right)
        if r is not None:
            failures.append(CheckFailure(idx, r,
                                         "conjugation does not reverse"))
    return CheckReport("hermitian", failures)


def check_unit(alg: StarAlgebra, samples) -> CheckReport:
    """1 * f == f * 1 == f exactly."""
    failures = []
    one = alg.one()
    for idx, f in enumerate(samples):
        fs = alg.series(f)
        r1 = alg.star(one, fs).first_difference(fs)
        r2 = alg.star(fs, one).first_difference(fs)
        bad = [r for r in (r1, r2) if r is not None]
        if bad:
            failures.append(CheckFailure(idx, min(bad),
                                         "unit is not preserved"))
    return CheckReport("unit", failures)


def check_vey(alg: StarAlgebra) -> CheckReport:
    """Observed differential orders never exceed the declared typing."""
    failures = []
    observed = []
    for r, c in enumerate(alg.stack.cochains):
        lo, ro = c.max_orders()
        observed.append((lo, ro))
        if max(lo, ro) > alg.stack.vey_orders[r]:
            failures.append(CheckFailure(
                None, r,
                f"cochain {r} has derivative orders {(lo, ro)}, declared "
                f"{alg.stack.vey_orders[r]}"))
    return CheckReport("vey", failures,
                       info={"observed": tuple(observed),
                             "declared": alg.stack.vey_orders})


# -- equivalence transformations ---------------------------------------------

def _multi_binom(a, g) -> int:
    out = 1
    for x, y in zip(a, g):
        out *= factorial(x) // (factorial(y) * factorial(x - y))
    return out


class DiffOp:
    """Finite linear differential operator sum(w * d^multi)."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms):
        clean = []
        for w, m in terms:
            m = tuple(m)
            if len(m) != nvars:
                raise StarError("operator multi-index has wrong length")
            if isinstance(w, (int, Fraction)):
                w = GaussianRational(w)
            if coeff_is_zero(w):
                continue
            clean.append((w, m))
        self.nvars = nvars
        self.terms = tuple(clean)

    @classmethod
    def identity(cls, nvars: int) -> "DiffOp":
        return cls(nvars, ((GR_ONE, (0,) * nvars),))

    @classmethod
    def zero(cls, nvars: int) -> "DiffOp":
        return cls(nvars, ())

    def apply(self, c):
        total = GR_ZERO
        for w, m in self.terms:
            dc = multi_derivative(c, m)
            if not coeff_is_zero(dc):
                total = total + w * dc
        return total

    def __add__(self, other: "DiffOp") -> "DiffOp":
        return DiffOp(self.nvars, self.terms + other.terms)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.nvars, tuple((-w, m) for w, m in self.terms))

    def compose(self, other: "DiffOp") -> "DiffOp":
        """self after other, expanded by the Leibniz rule."""
        out = []
        for w1, a in self.terms:
            for w2, b in other.terms:
                if isinstance(w2, GaussianRational):
                    out.append((w1 * w2, tuple(x + y for x, y in zip(a, b))))
                    continue
                for gamma in itertools.product(*(range(x + 1) for x in a)):
                    dw = multi_derivative(w2, gamma)
                    if coeff_is_zero(dw):
                        continue
                    coeff = w1 * dw * _multi_binom(a, gamma)
                    multi = tuple(x - gx + y for x, gx, y in
                                  zip(a, gamma, b))
                    out.append((coeff, multi))
        return DiffOp(self.nvars, out)

    @property
    def all_scalar(self) -> bool:
        return all(isinstance(w, GaussianRational) for w, _ in self.terms)


class EquivalenceTransform:
    """T = id + sum(T_r lambda^r, r >= 1) acting on truncated series."""

    __slots__ = ("nvars", "order", "maps")

    def __init__(self, nvars: int, order: int, maps):
        maps = tuple(maps)
        if len(maps) != order:
            raise StarError(
                f"need operators T_1..T_{order}, got {len(maps)}")
        for op in maps:
            if op.nvars != nvars:
                raise StarError("operator dimension mismatch")
        self.nvars = nvars
        self.order = order
        self.maps = maps

    @classmethod
    def identity(cls, nvars: int, order: int) -> "EquivalenceTransform":
        return cls(nvars, order, tuple(DiffOp.zero(nvars)
                                       for _ in range(order)))

    def op(self, r: int) -> DiffOp:
        """T_r as an operator, T_0 = id."""
        if r == 0:
            return DiffOp.identity(self.nvars)
        return self.maps[r - 1]

    def apply(self, f: FormalSeries) -> FormalSeries:
        if f.order != self.order:
            raise SeriesError("series order does not match the transform")
        out = []
        for r in range(self.order + 1):
            total = f.coeffs[r]
            for t in range(1, r + 1):
                c = self.maps[t - 1].apply(f.coeffs[r - t])
                if not coeff_is_zero(c):
                    total = total + c
            out.append(total)
        return FormalSeries(out, self.order)

    def inverse(self) -> "EquivalenceTransform":
        """Order-by-order compositional inverse S with S(T(f)) = f."""
        s_ops = [DiffOp.identity(self.nvars)]
        for r in range(1, self.order + 1):
            acc = DiffOp.zero(self.nvars)
            for s in range(r):
                acc = acc + s_ops[s].compose(self.op(r - s))
            s_ops.append(-acc)
        return EquivalenceTransform(self.nvars, self.order, s_ops[1:])

    @property
    def all_scalar(self) -> bool:
        return all(op.all_scalar for op in self.maps)


def apply_equivalence(transform: EquivalenceTransform, alg: StarAlgebra,
                      f, g) -> FormalSeries:
    """Pulled-back product T^{-1}(T(f) * T(g))."""
    if transform.order != alg.order:
        raise StarError("transform and algebra order differ")
    inv = transform.inverse()
    return inv.apply(alg.star(transform.apply(alg.series(f)),
                              transform.apply(alg.series(g))))


def transported_algebra(transform: EquivalenceTransform,
                        alg: StarAlgebra) -> StarAlgebra:
    """The pulled-back product as a first-class cochain stack.

    C'_r(f,g) = sum over a+b+c+d=r of S_a(C_b(T_c f, T_d g)) with S the
    inverse transform; the outer operator distributes over the bilinear
    terms by the Leibniz rule.  Only scalar-weight operators keep the
    result inside the scalar-weight cochain format.
    """
    if transform.order != alg.order:
        raise StarError("transform and algebra order differ")
    if not transform.all_scalar:
        raise StarError("transport needs scalar-coefficient operators")
    inv = transform.inverse()
    nv = transform.nvars
    n = alg.order
    cochains = []
    for r in range(n + 1):
        acc: dict = {}
        for a in range(r + 1):
            for b in range(r - a + 1):
                for c in range(r - a - b + 1):
                    d = r - a - b - c
                    for ws, m in inv.op(a).terms:
                        for w, left, right in alg.cochain(b).terms:
                            for wc, mc in transform.op(c).terms:
                                for wd, md in transform.op(d).terms:
                                    base = ws * w * wc * wd
                                    for gamma in itertools.product(
                                            *(range(x + 1) for x in m)):
                                        wt = base * _multi_binom(m, gamma)
                                        lkey = tuple(
                                            x + y + z for x, y, z in
                                            zip(left, mc, gamma))
                                        rkey = tuple(
                                            x + y + (mm - z)
                                            for x, y, mm, z in
                                            zip(right, md, m, gamma))
                                        key = (lkey, rkey)
                                        acc[key] = acc.get(key,
                                                           GR_ZERO) + wt
        cochains.append(Cochain(nv, ((w, l, rr) for (l, rr), w in
                                     acc.items())))
    stack = CochainStack(nv, cochains)
    return StarAlgebra(alg.variables, stack, n,
                       coeff_kind=alg.coeff_kind, theta=None)


# -- inverses ----------------------------------------------------------------

def star_inverse(alg: StarAlgebra, f) -> FormalSeries:
    """Two-sided star inverse by order recursion.

    Requires the classical part to be a unit of the coefficient algebra.
    The recursion builds the right inverse; the left identity then holds
    automatically and is verified.
    """
    f = alg.series(f)
    inv0 = alg.invert_coefficient(f.classical_part)
    g = [inv0]
    cochains = alg.stack.cochains
    for r in range(1, alg.order + 1):
        total = GR_ZERO
        for s in range(r + 1):
            fs = f.coeffs[s]
            if coeff_is_zero(fs):
                continue
            for t in range(r - s + 1):
                if t == r:
                    continue
                term = cochains[r - s - t].apply(fs, g[t])
                if not coeff_is_zero(term):
                    total = total + term
        g.append(-(inv0 * total) if not coeff_is_zero(total) else GR_ZERO)
    out = FormalSeries(g, alg.order)
    if alg.star(out, f) != alg.one():
        raise StarError("inverse verification failed on the left identity")
    return out


def star_binomial_half_inverse(alg: StarAlgebra, b):
    """(1 + b)^(-1/2) as the truncated binomial series in star powers.

    b must vanish classically, so star powers gain one lambda order each
    and the series is finite at the truncation order.  Works for scalar
    series and for square matrices (anything with star/scale/one_like).
    """
    if isinstance(b, FormalSeries):
        if not coeff_is_zero(b.classical_part):
            raise StarError("binomial argument must vanish classically")
        one = alg.one()
        mul = alg.star
    else:
        if not b.classical_is_zero():
            raise StarError("binomial argument must vanish classically")
        one = b.one_like()
        mul = lambda u, v: u.star(v)
    acc = one
    p = one
    coef = Fraction(1)
    for k in range(1, alg.order + 1):
        p = mul(p, b)
        coef = coef * Fraction(-(2 * k - 1), 2 * k)
        acc = acc + p.scale(coef)
    return acc
