"""Exact coefficient arithmetic.

Three coefficient kinds, all exact:

* ``GaussianRational``: complex numbers with rational real and imaginary
  parts.
* ``Poly``: multivariate polynomials over GaussianRational, stored sparsely
  as a map from exponent vectors to nonzero coefficients.
* ``RatFunc``: quotients of polynomials.  The denominator is kept as a
  product of monic factors with multiplicities so that derivatives and sums
  do not blow up; cancellation only uses exact polynomial division, never
  gcd heuristics, so every simplification is an identity.

Binary operations lift a scalar into a constant polynomial and a polynomial
into a rational function as needed.  Two operands with different nonempty
variable lists do not combine; that is always an error, never a coercion.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import lcm


class CoefficientError(Exception):
    pass


class VariableMismatchError(CoefficientError):
    pass


class NonUnitError(CoefficientError):
    pass


class PoleError(CoefficientError):
    pass


_F0 = Fraction(0)
_F1 = Fraction(1)


class GaussianRational:
    """Complex number a + b*i with rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @property
    def is_real(self) -> bool:
        return not self.im

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def inverse(self) -> "GaussianRational":
        n = self.re * self.re + self.im * self.im
        if not n:
            raise NonUnitError("cannot invert zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.im and not other.im:
            return GaussianRational(self.re * other.re)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = GR_ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (Poly, RatFunc)):
            return other == self
        other = _as_gr(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        return format_gaussian(self)


def _as_gr(v):
    if type(v) is GaussianRational:
        return v
    if isinstance(v, (int, Fraction)):
        return GaussianRational(v)
    return NotImplemented


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)


def format_gaussian(c: GaussianRational) -> str:
    """Render a GaussianRational in the coefficient grammar."""
    if not c.im:
        return str(c.re)
    if not c.re:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{c.im}*i"
    im = "+ i" if c.im == 1 else ("- i" if c.im == -1 else
                                  (f"+ {c.im}*i" if c.im > 0 else f"- {-c.im}*i"))
    return f"({c.re} {im})"


class Poly:
    """Sparse multivariate polynomial over GaussianRational.

    ``terms`` maps exponent tuples (one slot per variable) to nonzero
    coefficients.  The zero polynomial has an empty map.
    """

    __slots__ = ("variables", "_terms", "_dcache", "_packed", "_pows",
                 "_witness")

    def __init__(self, variables: tuple[str, ...], terms: dict):
        self.variables = variables
        self._terms = terms
        self._dcache = None
        self._packed = None
        self._pows = None
        self._witness = None

    @classmethod
    def _lazy(cls, variables, packed) -> "Poly":
        """Construct from a packed form; terms materialize on demand."""
        out = cls(variables, None)
        out._packed = packed
        return out

    @property
    def terms(self) -> dict:
        t = self._terms
        if t is None:
            d, items, _ = self._packed
            nv = len(self.variables)
            t = {}
            for pe, a, b in items:
                t[_unpack_exponents(pe, nv)] = GaussianRational(
                    Fraction(a, d), Fraction(b, d) if b else _F0)
            self._terms = t
        return t

    @classmethod
    def zero(cls, variables=()) -> "Poly":
        return cls(tuple(variables), {})

    @classmethod
    def const(cls, variables, c) -> "Poly":
        c = _as_gr(c)
        variables = tuple(variables)
        if not c:
            return cls(variables, {})
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, variables, name: str) -> "Poly":
        variables = tuple(variables)
        i = variables.index(name)
        exp = tuple(1 if j == i else 0 for j in range(len(variables)))
        return cls(variables, {exp: GR_ONE})

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        if self._terms is not None:
            return not self._terms
        return not self._packed[1]

    @property
    def is_constant(self) -> bool:
        if self._terms is None:
            items = self._packed[1]
            return not items or (len(items) == 1 and not items[0][0])
        if not self.terms:
            return True
        if len(self.terms) > 1:
            return False
        return not any(next(iter(self.terms)))

    def constant_value(self) -> GaussianRational:
        if not self.terms:
            return GR_ZERO
        if not self.is_constant:
            raise CoefficientError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def leading(self) -> tuple[tuple[int, ...], GaussianRational]:
        e = max(self.terms)
        return e, self.terms[e]

    # -- ring operations ---------------------------------------------------

    def _coerce(self, other):
        if type(other) is Poly:
            if other.variables == self.variables:
                return other
            if not other.variables:
                return Poly(self.variables,
                            {(0,) * len(self.variables): c
                             for c in other.terms.values()})
            if not self.variables:
                return None  # handled by caller through reflection
            raise VariableMismatchError(
                f"variables {self.variables} vs {other.variables}")
        g = _as_gr(other)
        if g is NotImplemented:
            return NotImplemented
        return Poly.const(self.variables, g)

    def __add__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return other + self
        if self._terms is None or o._terms is None:
            # stay in packed integer form when either side already is
            d1, t1, r1 = _packed_form(self)
            d2, t2, r2 = _packed_form(o)
            d = lcm(d1, d2)
            m1 = d // d1
            m2 = d // d2
            acc = {pe: (a * m1, b * m1) for pe, a, b in t1}
            for pe, a, b in t2:
                cur = acc.get(pe)
                if cur is None:
                    acc[pe] = (a * m2, b * m2)
                else:
                    na = cur[0] + a * m2
                    nb = cur[1] + b * m2
                    if na or nb:
                        acc[pe] = (na, nb)
                    else:
                        del acc[pe]
            items = [(pe, a, b) for pe, (a, b) in acc.items()]
            return Poly._lazy(self.variables, (d, items, r1 and r2))
        terms = dict(self.terms)
        for e, c in o.terms.items():
            s = terms.get(e)
            s = c if s is None else s + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Poly(self.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        if self._terms is None:
            d, items, real = self._packed
            return Poly._lazy(self.variables,
                              (d, [(pe, -a, -b) for pe, a, b in items], real))
        return Poly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        if isinstance(other, Poly):
            return self + (-other)
        g = _as_gr(other)
        if g is NotImplemented:
            return NotImplemented
        return self + (-g)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return other * self
        if not self.terms or not o.terms:
            return Poly.zero(self.variables)
        # Multiply in the packed integer form: one gcd per result term
        # instead of one per term product.
        d1, t1, real1 = _packed_form(self)
        d2, t2, real2 = _packed_form(o)
        acc_re: dict = {}
        acc_im: dict = {}
        if real1 and real2:
            for p1, a1, _ in t1:
                for p2, a2, _ in t2:
                    e = p1 + p2
                    acc_re[e] = acc_re.get(e, 0) + a1 * a2
        elif real2:
            for p1, a1, b1 in t1:
                for p2, a2, _ in t2:
                    e = p1 + p2
                    acc_re[e] = acc_re.get(e, 0) + a1 * a2
                    acc_im[e] = acc_im.get(e, 0) + b1 * a2
        elif real1:
            for p1, a1, _ in t1:
                for p2, a2, b2 in t2:
                    e = p1 + p2
                    acc_re[e] = acc_re.get(e, 0) + a1 * a2
                    acc_im[e] = acc_im.get(e, 0) + a1 * b2
        else:
            for p1, a1, b1 in t1:
                for p2, a2, b2 in t2:
                    e = p1 + p2
                    acc_re[e] = acc_re.get(e, 0) + a1 * a2 - b1 * b2
                    acc_im[e] = acc_im.get(e, 0) + a1 * b2 + b1 * a2
        d = d1 * d2
        packed = []
        real = True
        for p, a in acc_re.items():
            b = acc_im.pop(p, 0)
            if a or b:
                if b:
                    real = False
                packed.append((p, a, b))
        for p, b in acc_im.items():
            if b:
                real = False
                packed.append((p, 0, b))
        return Poly._lazy(self.variables, (d, packed, real))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise CoefficientError("polynomial powers take exponents >= 0")
        if k == 0:
            return Poly.const(self.variables, GR_ONE)
        if k == 1:
            return self
        if self._pows is None:
            self._pows = {}
        hit = self._pows.get(k)
        if hit is None:
            hit = self ** (k - 1) * self
            self._pows[k] = hit
        return hit

    def __truediv__(self, other):
        return self * invert(other)

    def __rtruediv__(self, other):
        return invert(self) * other

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return other == self
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return other == self
        return self.terms == o.terms

    __hash__ = None

    # -- calculus ----------------------------------------------------------

    def derivative(self, var: int | str) -> "Poly":
        i = var if isinstance(var, int) else self.variables.index(var)
        if self._dcache is None:
            self._dcache = {}
        hit = self._dcache.get(i)
        if hit is not None:
            return hit
        if self._terms is None:
            dd, items, real = self._packed
            shift = _EXP_BITS * i
            lowered = []
            for pe, a, b in items:
                k = (pe >> shift) & _EXP_MASK
                if k:
                    lowered.append((pe - (1 << shift), a * k, b * k))
            d = Poly._lazy(self.variables, (dd, lowered, real))
        else:
            out: dict = {}
            for e, c in self.terms.items():
                k = e[i]
                if k:
                    ne = e[:i] + (k - 1,) + e[i + 1:]
                    nc = c * k
                    s = out.get(ne)
                    s = nc if s is None else s + nc
                    if s:
                        out[ne] = s
                    else:
                        out.pop(ne, None)
            d = Poly(self.variables, out)
        self._dcache[i] = d
        return d

    def conjugate(self) -> "Poly":
        if self._terms is None:
            d, items, real = self._packed
            return Poly._lazy(self.variables,
                              (d, [(pe, a, -b) for pe, a, b in items], real))
        return Poly(self.variables,
                    {e: c.conjugate() for e, c in self.terms.items()})

    def evaluate(self, point) -> GaussianRational:
        if len(point) != len(self.variables):
            raise CoefficientError("evaluation point has wrong length")
        pt = [Fraction(p) for p in point]
        total = GR_ZERO
        for e, c in self.terms.items():
            m = _F1
            for p, k in zip(pt, e):
                if k:
                    m *= p ** k
            total = total + c * m
        return total

    def __repr__(self):
        return f"Poly({format_coefficient(self)!r})"

    def __str__(self):
        return format_coefficient(self)


# Exponent vectors pack into one int, 20 bits per variable, so products add
# exponents with a single integer addition and dict keys hash fast.  Total
# degrees stay far below 2**20 here.
_EXP_BITS = 20
_EXP_MASK = (1 << _EXP_BITS) - 1


def _pack_exponents(e) -> int:
    out = 0
    for i, k in enumerate(e):
        out |= k << (_EXP_BITS * i)
    return out


def _unpack_exponents(p: int, nvars: int) -> tuple:
    return tuple((p >> (_EXP_BITS * i)) & _EXP_MASK for i in range(nvars))


def _packed_form(p: "Poly"):
    """(D, [(packed exponent, re int, im int)], real flag) with coefficient
    lists scaled by the common denominator D."""
    pk = p._packed
    if pk is None:
        d = 1
        for c in p.terms.values():
            d = lcm(d, c.re.denominator)
            if c.im:
                d = lcm(d, c.im.denominator)
        items = []
        real = True
        for e, c in p.terms.items():
            a = c.re.numerator * (d // c.re.denominator)
            b = c.im.numerator * (d // c.im.denominator) if c.im else 0
            if b:
                real = False
            items.append((_pack_exponents(e), a, b))
        pk = p._packed = (d, items, real)
    return pk


def try_divide(a: Poly, b: Poly) -> Poly | None:
    """Return q with a == q*b, or None when b does not divide a exactly."""
    if b.is_zero:
        raise NonUnitError("division by the zero polynomial")
    if a.is_zero:
        return Poly.zero(a.variables)
    if len(a.terms) == 1 and len(b.terms) > 1:
        # a nonzero quotient against a 2+ term divisor keeps at least the
        # two extreme monomials of the product, so a monomial never splits
        return None
    nv = len(a.variables)
    db, tb, _ = _packed_form(b)
    if db == 1:
        bt = sorted(tb, reverse=True)
        if bt[0][1] == 1 and bt[0][2] == 0:
            return _try_divide_packed(a, bt, nv)
    rem = {_pack_exponents(e): c for e, c in a.terms.items()}
    bt = sorted(((_pack_exponents(e), c) for e, c in b.terms.items()),
                reverse=True)
    lb, lbc = bt[0]
    lbf = _unpack_exponents(lb, nv)
    tail = bt[1:]
    lbc_is_one = lbc == GR_ONE
    quot: dict = {}
    # Division by the leading term under the packed order; the packed order
    # is a monomial order, so exactness does not depend on which one is used.
    while rem:
        lr = max(rem)
        d = lr - lb
        if d < 0:
            return None
        lrf = _unpack_exponents(lr, nv)
        if any(x < y for x, y in zip(lrf, lbf)):
            return None
        c = rem.pop(lr)
        if not lbc_is_one:
            c = c / lbc
        quot[d] = c
        for p, cb in tail:
            t = p + d
            s = rem.get(t)
            s = -(c * cb) if s is None else s - c * cb
            if s:
                rem[t] = s
            else:
                rem.pop(t, None)
    return Poly(a.variables, {_unpack_exponents(p, nv): c
                              for p, c in quot.items()})


def _try_divide_packed(a: Poly, bt, nv: int) -> Poly | None:
    """Division fast path: divisor has integer coefficients and leading
    coefficient one under the packed order, so the whole run is integer
    arithmetic scaled by the dividend's common denominator."""
    da, ta, _ = _packed_form(a)
    rem = {pe: (x, y) for pe, x, y in ta}
    lb = bt[0][0]
    lbf = _unpack_exponents(lb, nv)
    tail = bt[1:]
    quot: dict = {}
    while rem:
        lr = max(rem)
        d = lr - lb
        if d < 0:
            return None
        lrf = _unpack_exponents(lr, nv)
        if any(x < y for x, y in zip(lrf, lbf)):
            return None
        ca, cb = rem.pop(lr)
        quot[d] = (ca, cb)
        for p, ba, bb in tail:
            t = p + d
            ra, rb = rem.get(t, (0, 0))
            ra -= ca * ba - cb * bb
            rb -= ca * bb + cb * ba
            if ra or rb:
                rem[t] = (ra, rb)
            else:
                rem.pop(t, None)
    terms = {}
    for p, (x, y) in quot.items():
        terms[_unpack_exponents(p, nv)] = GaussianRational(
            Fraction(x, da), Fraction(y, da) if y else _F0)
    return Poly(a.variables, terms)


def _monic(p: Poly) -> tuple[Poly, GaussianRational]:
    """Scale p so its lex-leading coefficient is 1; return (monic, scale)."""
    _, lc = p.leading()
    if lc == GR_ONE:
        return p, GR_ONE
    inv = lc.inverse()
    return Poly(p.variables, {e: c * inv for e, c in p.terms.items()}), lc


class RatFunc:
    """Quotient of polynomials with a factored denominator.

    ``factors`` is a tuple of (monic nonconstant Poly, positive exponent)
    pairs.  The public ``den`` is their product.  Construction cancels any
    factor that divides the numerator exactly; no other simplification is
    attempted, and equality is decided by cross multiplication.
    """

    __slots__ = ("variables", "num", "factors", "_den", "_dcache")

    def __init__(self, num: Poly, factors=(), _reduce=True):
        self.variables = num.variables
        if _reduce:
            num, factors = _reduce_fraction(num, factors)
        self.num = num
        self.factors = factors
        self._den = None
        self._dcache = None

    @classmethod
    def from_num_den(cls, num: Poly, den: Poly) -> "RatFunc":
        if den.is_zero:
            raise NonUnitError("zero denominator")
        if den.is_constant:
            return cls(num * den.constant_value().inverse(), ())
        monic, scale = _monic(den)
        return cls(num * scale.inverse(), ((monic, 1),))

    @property
    def den(self) -> Poly:
        if self._den is None:
            d = Poly.const(self.variables, GR_ONE)
            for f, e in self.factors:
                d = d * f ** e
            self._den = d
        return self._den

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_constant(self) -> bool:
        return not self.factors and self.num.is_constant

    def constant_value(self) -> GaussianRational:
        if not self.is_constant:
            raise CoefficientError("rational function is not constant")
        return self.num.constant_value()

    def as_poly(self) -> Poly:
        """Exact polynomial form; error when the denominator survives."""
        if not self.factors:
            return self.num
        q = try_divide(self.num, self.den)
        if q is None:
            raise CoefficientError("rational function is not polynomial")
        return q

    # -- arithmetic --------------------------------------------------------

    def _pair(self, other):
        """Coerce both operands to RatFunc over a common variable list."""
        if isinstance(other, (int, Fraction)):
            other = _as_gr(other)
        if isinstance(other, GaussianRational):
            other = RatFunc(Poly.const(self.variables, other), ())
        elif isinstance(other, Poly):
            other = RatFunc(other, (), _reduce=False)
        elif not isinstance(other, RatFunc):
            return NotImplemented
        if self.variables == other.variables:
            return self, other
        if not other.variables:
            return self, RatFunc(lift(other.num, self.variables),
                                 (), _reduce=False)
        if not self.variables:
            return (RatFunc(lift(self.num, other.variables),
                            (), _reduce=False), other)
        raise VariableMismatchError(
            f"variables {self.variables} vs {other.variables}")

    def __add__(self, other):
        pair = self._pair(other)
        if pair is NotImplemented:
            return NotImplemented
        a, b = pair
        if a.num.is_zero:
            return b
        if b.num.is_zero:
            return a
        if a.factors == b.factors:
            return RatFunc(a.num + b.num, a.factors)
        common = _merge_max(a.factors, b.factors)
        na = a.num * _complement(a.variables, common, a.factors)
        nb = b.num * _complement(b.variables, common, b.factors)
        return RatFunc(na + nb, common)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.factors, _reduce=False)

    def __sub__(self, other):
        pair = self._pair(other)
        if pair is NotImplemented:
            return NotImplemented
        a, b = pair
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._pair(other)
        if pair is NotImplemented:
            return NotImplemented
        a, b = pair
        return RatFunc(a.num * b.num, _merge_add(a.factors, b.factors))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (Poly, RatFunc)):
            other = _as_gr(other)
            if other is NotImplemented:
                return NotImplemented
        return self * invert(other)

    def __rtruediv__(self, other):
        return invert(self) * other

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise CoefficientError("powers take integer exponents")
        if k < 0:
            return invert(self) ** (-k)
        out = RatFunc(Poly.const(self.variables, GR_ONE), ())
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        pair = self._pair(other)
        if pair is NotImplemented:
            return NotImplemented
        a, b = pair
        if a.factors == b.factors:
            return a.num == b.num
        return a.num * b.den == b.num * a.den

    __hash__ = None

    # -- calculus ----------------------------------------------------------

    def derivative(self, var: int | str) -> "RatFunc":
        i = var if isinstance(var, int) else self.variables.index(var)
        if self._dcache is None:
            self._dcache = {}
        hit = self._dcache.get(i)
        if hit is not None:
            return hit
        # d(num / prod f^e) has numerator
        #   num' * prod(f) - num * sum_j e_j f_j' prod_{k!=j} f_k
        # over prod f^(e+1): each factor exponent only grows by one.
        full = Poly.const(self.variables, GR_ONE)
        for f, _ in self.factors:
            full = full * f
        top = self.num.derivative(i) * full
        for j, (f, e) in enumerate(self.factors):
            rest = Poly.const(self.variables, GR_ONE)
            for k, (g, _) in enumerate(self.factors):
                if k != j:
                    rest = rest * g
            top = top - self.num * (f.derivative(i) * e) * rest
        out = RatFunc(top, tuple((f, e + 1) for f, e in self.factors))
        self._dcache[i] = out
        return out

    def conjugate(self) -> "RatFunc":
        return RatFunc(self.num.conjugate(),
                       tuple((f.conjugate(), e) for f, e in self.factors),
                       _reduce=False)

    def evaluate(self, point) -> GaussianRational:
        top = self.num.evaluate(point)
        for f, e in self.factors:
            v = f.evaluate(point)
            if not v:
                raise PoleError("denominator vanishes at evaluation point")
            top = top * v.inverse() ** e
        return top

    def __repr__(self):
        return f"RatFunc({format_coefficient(self)!r})"

    def __str__(self):
        return format_coefficient(self)


def _eval_gr(p: Poly, point) -> GaussianRational:
    """Evaluate at a Gaussian rational point, with per-variable power tables."""
    if not p.terms:
        return GR_ZERO
    nv = len(p.variables)
    maxdeg = [0] * nv
    for e in p.terms:
        for i, k in enumerate(e):
            if k > maxdeg[i]:
                maxdeg[i] = k
    pows = []
    for v, m in zip(point, maxdeg):
        row = [GR_ONE]
        for _ in range(m):
            row.append(row[-1] * v)
        pows.append(row)
    total = GR_ZERO
    for e, c in p.terms.items():
        m = c
        for i, k in enumerate(e):
            if k:
                m = m * pows[i][k]
        total = total + m
    return total


# Candidate coordinates for zero witnesses, simplest first.  Includes the
# 3-4-5 points so that sums of squares get witnesses with no coordinate
# equal to zero.
_WITNESS_COORDS = (
    GaussianRational(0), GaussianRational(1), GaussianRational(-1),
    GaussianRational(0, 1), GaussianRational(0, -1),
    GaussianRational(2), GaussianRational(-2),
    GaussianRational(1, 1), GaussianRational(1, -1),
    GaussianRational(Fraction(1, 2)), GaussianRational(Fraction(-1, 2)),
    GaussianRational(3), GaussianRational(-3),
    GaussianRational(0, Fraction(3, 5)), GaussianRational(0, Fraction(4, 5)),
    GaussianRational(0, Fraction(-3, 5)), GaussianRational(0, Fraction(-4, 5)),
    GaussianRational(Fraction(3, 5)), GaussianRational(Fraction(4, 5)),
    GaussianRational(0, 2), GaussianRational(0, -2),
    GaussianRational(0, Fraction(1, 2)), GaussianRational(0, Fraction(-1, 2)),
)

# Witness evaluations run modulo a large prime with i represented by a
# square root of -1.  A nonzero residue proves a nonzero exact value; a
# zero residue just falls through to the exact division.
_MOD_P = 998244353
_MOD_I = pow(3, (_MOD_P - 1) // 4, _MOD_P)
assert (_MOD_I * _MOD_I + 1) % _MOD_P == 0


def _mod_residue(c: GaussianRational):
    dr = c.re.denominator % _MOD_P
    di = c.im.denominator % _MOD_P
    if not dr or not di:
        return None
    r = c.re.numerator * pow(dr, -1, _MOD_P)
    if c.im:
        r += _MOD_I * c.im.numerator * pow(di, -1, _MOD_P)
    return r % _MOD_P


def _witness_point(f: Poly):
    """A cached zero of f reduced mod p, or None when none was found.

    The search runs over small exact Gaussian rational points.  Zeros let
    divisibility tests fail fast: f(w) == 0 exactly and the factors are
    monic, so f | num forces num(w) == 0, hence residue zero mod p.
    Missing witnesses only cost speed, never exactness.
    """
    w = f._witness
    if w is None:
        nv = len(f.variables)
        coords = _WITNESS_COORDS if nv <= 2 else _WITNESS_COORDS[:9]
        w = ()
        fallback = None
        # A zero coordinate makes the test blind to monomial factors of
        # the numerator, so full-support zeros are preferred.
        for pt in itertools.product(coords, repeat=nv):
            if not _eval_gr(f, pt):
                mods = tuple(_mod_residue(c) for c in pt)
                if None in mods:
                    continue
                if all(c for c in pt):
                    w = mods
                    break
                if fallback is None:
                    fallback = mods
        if not w and fallback is not None:
            w = fallback
        f._witness = w
    return w or None


# Power rows per residue, shared across evaluations and grown on demand.
_POW_ROWS: dict = {}


def _mod_eval(p: Poly, wmod):
    """Evaluate mod p at a residue point; None when p divides a scale."""
    d, items, _ = _packed_form(p)
    if d % _MOD_P == 0:
        return None
    rows = []
    for w in wmod:
        row = _POW_ROWS.get(w)
        if row is None:
            row = _POW_ROWS[w] = [1, w]
        rows.append(row)
    total = 0
    for pe, a, b in items:
        m = (a + _MOD_I * b) % _MOD_P
        i = 0
        while pe:
            k = pe & _EXP_MASK
            if k:
                row = rows[i]
                while len(row) <= k:
                    row.append(row[-1] * row[1] % _MOD_P)
                m = m * row[k] % _MOD_P
            pe >>= _EXP_BITS
            i += 1
        total += m
    return total % _MOD_P


def _reduce_fraction(num: Poly, factors):
    if num.is_zero:
        return num, ()
    kept = []
    for f, e in factors:
        witness = _witness_point(f)
        while e > 0:
            if witness is not None and _mod_eval(num, witness):
                break
            q = try_divide(num, f)
            if q is None:
                break
            num, e = q, e - 1
        if e > 0:
            kept.append((f, e))
    return num, tuple(kept)


def _merge_max(fa, fb):
    out = list(fa)
    for f, e in fb:
        for i, (g, d) in enumerate(out):
            if g == f:
                if e > d:
                    out[i] = (g, e)
                break
        else:
            out.append((f, e))
    return tuple(out)


def _merge_add(fa, fb):
    out = list(fa)
    for f, e in fb:
        for i, (g, d) in enumerate(out):
            if g == f:
                out[i] = (g, d + e)
                break
        else:
            out.append((f, e))
    return tuple(out)


def _complement(variables, common, own):
    """Product of common factors missing from this operand's denominator."""
    out = Poly.const(variables, GR_ONE)
    for f, e in common:
        mine = 0
        for g, d in own:
            if g == f:
                mine = d
                break
        if e > mine:
            out = out * f ** (e - mine)
    return out


# -- kind-generic helpers ---------------------------------------------------

Coefficient = GaussianRational | Poly | RatFunc


def conjugate(a):
    if isinstance(a, (int, Fraction)):
        return _as_gr(a)
    return a.conjugate()


def derivative(a, var):
    """Partial derivative; scalars differentiate to zero."""
    if isinstance(a, (Poly, RatFunc)):
        return a.derivative(var)
    return GR_ZERO


def invert(a):
    """Multiplicative inverse. Nonconstant Poly inputs lift to RatFunc."""
    if isinstance(a, (int, Fraction)):
        a = _as_gr(a)
    if isinstance(a, GaussianRational):
        return a.inverse()
    if isinstance(a, Poly):
        if a.is_zero:
            raise NonUnitError("cannot invert zero")
        if a.is_constant:
            return Poly.const(a.variables, a.constant_value().inverse())
        return RatFunc.from_num_den(Poly.const(a.variables, GR_ONE), a)
    if a.is_zero:
        raise NonUnitError("cannot invert zero")
    monic, scale = (_monic(a.num) if not a.num.is_constant
                    else (None, a.num.constant_value()))
    den_as_num = a.den * scale.inverse()
    if monic is None:
        return RatFunc(den_as_num, ())
    return RatFunc(den_as_num, ((monic, 1),))


def evaluate(a, point):
    if isinstance(a, (int, Fraction)):
        return _as_gr(a)
    if isinstance(a, GaussianRational):
        return a
    return a.evaluate(point)


def is_zero(a) -> bool:
    if isinstance(a, (int, Fraction)):
        return not a
    if isinstance(a, GaussianRational):
        return not a
    return a.is_zero


def coeff_eq(a, b) -> bool:
    r = (a == b)
    if r is NotImplemented:
        raise VariableMismatchError("cannot compare these coefficients")
    return bool(r)


def variables_of(a) -> tuple[str, ...]:
    if isinstance(a, (Poly, RatFunc)):
        return a.variables
    return ()


def lift(a, variables: tuple[str, ...]):
    """View a coefficient over the given variable list (scalars embed)."""
    if isinstance(a, (int, Fraction)):
        a = _as_gr(a)
    if isinstance(a, GaussianRational):
        return Poly.const(variables, a) if variables else a
    if a.variables == tuple(variables):
        return a
    if not a.variables:
        if isinstance(a, Poly):
            return Poly(tuple(variables),
                        {(0,) * len(variables): c for c in a.terms.values()})
        return RatFunc(lift(a.num, variables), ())
    raise VariableMismatchError(
        f"cannot view variables {a.variables} as {tuple(variables)}")


def demote(a):
    """Shrink the representation when exact: RatFunc->Poly->scalar."""
    if isinstance(a, RatFunc):
        try:
            a = a.as_poly()
        except CoefficientError:
            return a
    if isinstance(a, Poly) and a.is_constant:
        return a.constant_value()
    return a


# -- formatting -------------------------------------------------------------

def _format_monomial(variables, exps) -> str:
    parts = []
    for v, e in zip(variables, exps):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    chunks = []
    for e in sorted(p.terms, reverse=True):
        c = p.terms[e]
        mono = _format_monomial(p.variables, e)
        if not mono:
            chunks.append(format_gaussian(c))
        elif c == GR_ONE:
            chunks.append(mono)
        elif c == GaussianRational(-1):
            chunks.append(f"-{mono}")
        else:
            chunks.append(f"{format_gaussian(c)}*{mono}")
    out = chunks[0]
    for ch in chunks[1:]:
        out += f" - {ch[1:]}" if ch.startswith("-") else f" + {ch}"
    return out


def format_coefficient(a) -> str:
    """Render any coefficient in the grammar accepted by the parser."""
    if isinstance(a, (int, Fraction)):
        a = _as_gr(a)
    if isinstance(a, GaussianRational):
        return format_gaussian(a)
    if isinstance(a, Poly):
        return format_poly(a)
    if not a.factors:
        return format_poly(a.num)
    return f"({format_poly(a.num)})/({format_poly(a.den)})"
