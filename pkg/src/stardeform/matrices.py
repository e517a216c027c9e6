"""Matrix algebras over a deformed product and their constructive procedures.

StarMatrix is a square matrix of truncated series multiplied entrywise by
the deformed product.  On top of it sit the four workhorse constructions:
projection deformation (closed form and defect-driven recursion), Hermitian
factorization S = L* . L, unitary deformation, and the intertwiner joining
two deformations of one projection.  All verification is exact; every
procedure checks its defining identity before returning.
"""

from __future__ import annotations

from fractions import Fraction

from .coefficients import (
    CoefficientError,
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    NonUnitError,
    Poly,
    RatFunc,
    conjugate as coeff_conjugate,
    invert as coeff_invert,
    is_zero as coeff_is_zero,
    coeff_eq,
    demote,
    lift,
)
from .series import FormalSeries
from .starproducts import StarAlgebra, StarError, star_binomial_half_inverse


class MatrixError(StarError):
    pass


# -- classical grids ----------------------------------------------------------
# A "grid" is a tuple-of-tuples of Coefficients: one lambda-coefficient of a
# matrix.  All the leading-order corrections in the recursions below are
# classical, so grid arithmetic is kept separate from series arithmetic.

def cgrid(rows):
    return tuple(tuple(r) for r in rows)


def cgrid_zero(n: int):
    return tuple((GR_ZERO,) * n for _ in range(n))


def cgrid_identity(n: int):
    return tuple(tuple(GR_ONE if i == j else GR_ZERO for j in range(n))
                 for i in range(n))


def cgrid_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb))
                 for ra, rb in zip(a, b))


def cgrid_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb))
                 for ra, rb in zip(a, b))


def cgrid_mul(a, b):
    n = len(a)
    m = len(b[0])
    return tuple(tuple(
        sum((a[i][k] * b[k][j] for k in range(1, len(b))),
            a[i][0] * b[0][j]) for j in range(m)) for i in range(n))


def cgrid_scale(a, c):
    return tuple(tuple(x * c for x in row) for row in a)


def cgrid_adjoint(a):
    n = len(a)
    m = len(a[0])
    return tuple(tuple(coeff_conjugate(a[i][j]) for i in range(n))
                 for j in range(m))


def cgrid_eq(a, b) -> bool:
    return all(coeff_eq(x, y) for ra, rb in zip(a, b)
               for x, y in zip(ra, rb))


def cgrid_is_zero(a) -> bool:
    return all(coeff_is_zero(x) for row in a for x in row)


def cgrid_trace(a):
    t = a[0][0]
    for i in range(1, len(a)):
        t = t + a[i][i]
    return t


def _as_ratfunc(c, variables):
    c = lift(c, variables)
    if isinstance(c, RatFunc):
        return c
    if isinstance(c, Poly):
        return RatFunc(c, ())
    return RatFunc(Poly.const(variables, c), ())


def cgrid_inverse(a, alg: StarAlgebra):
    """Exact classical matrix inverse by Gauss-Jordan elimination.

    Works over the rational-function field; for a polynomial-kind algebra
    the result must land back in polynomials (constant determinant), else
    this raises NonUnitError.
    """
    n = len(a)
    variables = alg.variables
    work = [[_as_ratfunc(c, variables) for c in row] for row in a]
    aug = [row + [_as_ratfunc(GR_ONE if i == j else GR_ZERO, variables)
                  for j in range(n)] for i, row in enumerate(work)]
    for col in range(n):
        pivot_row = None
        for r in range(col, n):
            if not aug[r][col].is_zero:
                pivot_row = r
                break
        if pivot_row is None:
            raise NonUnitError("classical matrix is singular")
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        inv_p = coeff_invert(aug[col][col])
        aug[col] = [x * inv_p for x in aug[col]]
        for r in range(n):
            if r == col:
                continue
            factor = aug[r][col]
            if factor.is_zero:
                continue
            aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            c = demote(aug[i][j + n])
            if alg.coeff_kind == "poly" and isinstance(c, RatFunc):
                raise NonUnitError(
                    "classical inverse does not exist over polynomial "
                    "coefficients")
            row.append(c)
        out.append(tuple(row))
    return tuple(out)


# -- the matrix algebra -------------------------------------------------------

class StarMatrix:
    """Square matrix of FormalSeries over one StarAlgebra."""

    __slots__ = ("alg", "n", "rows")

    def __init__(self, alg: StarAlgebra, rows):
        rows = tuple(tuple(alg.series(e) for e in row) for row in rows)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise MatrixError("matrix must be square")
        self.alg = alg
        self.n = n
        self.rows = rows

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_classical(cls, alg: StarAlgebra, grid) -> "StarMatrix":
        return cls(alg, grid)

    @classmethod
    def from_grid_at(cls, alg: StarAlgebra, grid, k: int) -> "StarMatrix":
        """Matrix with a single lambda^k coefficient layer."""
        return cls(alg, tuple(tuple(
            FormalSeries([GR_ZERO] * k + [c] + [GR_ZERO] * (alg.order - k),
                         alg.order) for c in row) for row in grid))

    @classmethod
    def identity(cls, alg: StarAlgebra, n: int) -> "StarMatrix":
        return cls(alg, cgrid_identity(n))

    @classmethod
    def zeros(cls, alg: StarAlgebra, n: int) -> "StarMatrix":
        return cls(alg, cgrid_zero(n))

    @classmethod
    def from_columns(cls, alg: StarAlgebra, cols) -> "StarMatrix":
        cols = tuple(tuple(col) for col in cols)
        n = len(cols)
        if any(len(col) != n for col in cols):
            raise MatrixError("matrix must be square")
        return cls(alg, tuple(tuple(cols[j][i] for j in range(n))
                              for i in range(n)))

    # -- access ---------------------------------------------------------------

    @property
    def order(self) -> int:
        return self.alg.order

    def entry(self, i: int, j: int) -> FormalSeries:
        return self.rows[i][j]

    def column(self, j: int):
        return tuple(self.rows[i][j] for i in range(self.n))

    def grid(self, r: int):
        return tuple(tuple(e.coeffs[r] for e in row) for row in self.rows)

    def classical_grid(self):
        return self.grid(0)

    # -- linear structure ------------------------------------------------------

    def _check(self, other: "StarMatrix"):
        if self.n != other.n or self.alg is not other.alg and \
                self.alg.order != other.alg.order:
            raise MatrixError("matrix size or algebra mismatch")

    def __add__(self, other: "StarMatrix") -> "StarMatrix":
        self._check(other)
        return StarMatrix(self.alg, tuple(
            tuple(x + y for x, y in zip(ra, rb))
            for ra, rb in zip(self.rows, other.rows)))

    def __sub__(self, other: "StarMatrix") -> "StarMatrix":
        self._check(other)
        return StarMatrix(self.alg, tuple(
            tuple(x - y for x, y in zip(ra, rb))
            for ra, rb in zip(self.rows, other.rows)))

    def __neg__(self) -> "StarMatrix":
        return StarMatrix(self.alg,
                          tuple(tuple(-x for x in row) for row in self.rows))

    def scale(self, c) -> "StarMatrix":
        return StarMatrix(self.alg, tuple(tuple(x.scale(c) for x in row)
                                          for row in self.rows))

    def __eq__(self, other) -> bool:
        if not isinstance(other, StarMatrix):
            return NotImplemented
        if self.n != other.n:
            return False
        return all(x == y for ra, rb in zip(self.rows, other.rows)
                   for x, y in zip(ra, rb))

    __hash__ = None

    def first_difference(self, other: "StarMatrix"):
        """(order, i, j) of the lowest-order differing coefficient, or None."""
        best = None
        for i in range(self.n):
            for j in range(self.n):
                r = self.rows[i][j].first_difference(other.rows[i][j])
                if r is not None and (best is None or r < best[0]):
                    best = (r, i, j)
        return best

    # -- multiplicative structure ----------------------------------------------

    def star(self, other: "StarMatrix") -> "StarMatrix":
        self._check(other)
        star = self.alg.star
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = star(self.rows[i][0], other.rows[0][j])
                for k in range(1, n):
                    acc = acc + star(self.rows[i][k], other.rows[k][j])
                row.append(acc)
            out.append(tuple(row))
        return StarMatrix(self.alg, tuple(out))

    def star_col(self, col):
        """Matrix times column vector under the deformed product."""
        col = tuple(self.alg.series(c) for c in col)
        if len(col) != self.n:
            raise MatrixError("column length mismatch")
        star = self.alg.star
        out = []
        for i in range(self.n):
            acc = star(self.rows[i][0], col[0])
            for k in range(1, self.n):
                acc = acc + star(self.rows[i][k], col[k])
            out.append(acc)
        return tuple(out)

    def lstar_scalar(self, f) -> "StarMatrix":
        f = self.alg.series(f)
        star = self.alg.star
        return StarMatrix(self.alg, tuple(tuple(star(f, x) for x in row)
                                          for row in self.rows))

    def rstar_scalar(self, f) -> "StarMatrix":
        f = self.alg.series(f)
        star = self.alg.star
        return StarMatrix(self.alg, tuple(tuple(star(x, f) for x in row)
                                          for row in self.rows))

    def adjoint(self) -> "StarMatrix":
        return StarMatrix(self.alg, tuple(
            tuple(self.rows[i][j].conjugate() for i in range(self.n))
            for j in range(self.n)))

    def star_trace(self) -> FormalSeries:
        t = self.rows[0][0]
        for i in range(1, self.n):
            t = t + self.rows[i][i]
        return t

    def one_like(self) -> "StarMatrix":
        return StarMatrix.identity(self.alg, self.n)

    # -- predicates --------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return all(x.is_zero for row in self.rows for x in row)

    def classical_is_zero(self) -> bool:
        return cgrid_is_zero(self.grid(0))

    def first_nonzero_order(self):
        orders = [x.first_nonzero_order() for row in self.rows for x in row]
        orders = [r for r in orders if r is not None]
        return min(orders) if orders else None

    def is_hermitian(self) -> bool:
        return self == self.adjoint()

    def is_idempotent(self) -> bool:
        return self.star(self) == self


# -- constructive procedures ---------------------------------------------------

def _require_classical_idempotent(grid):
    if not cgrid_eq(cgrid_mul(grid, grid), grid):
        raise MatrixError("classical matrix is not idempotent")


def deform_projection_fedosov(alg: StarAlgebra, p0_grid,
                              hermitian: bool | None = None) -> StarMatrix:
    """Closed-form idempotent deformation of a classical idempotent.

    P = 1/2 + (P0 - 1/2) . (1 + 4(P0.P0 - P0))^(-1/2), all products
    deformed.  The binomial argument commutes with P0, which makes the
    result exactly idempotent at every truncation order.
    """
    p0_grid = cgrid(p0_grid)
    _require_classical_idempotent(p0_grid)
    if hermitian is None:
        hermitian = (cgrid_eq(cgrid_adjoint(p0_grid), p0_grid)
                     and alg.stack.hermitian_flag)
    p0 = StarMatrix.from_classical(alg, p0_grid)
    n = p0.n
    defect = p0.star(p0) - p0
    b = defect.scale(4)
    if not b.classical_is_zero():
        raise MatrixError("classical idempotency lost in the deformed square")
    if b.star(p0) != p0.star(b):
        raise MatrixError("binomial argument fails to commute with P0")
    x = star_binomial_half_inverse(alg, b)
    half = StarMatrix.identity(alg, n).scale(Fraction(1, 2))
    p = half + (p0 - half).star(x)
    if p.star(p) != p:
        raise MatrixError("closed-form deformation failed idempotency")
    if hermitian and p.adjoint() != p:
        raise MatrixError("closed-form deformation failed hermiticity")
    return p


def deform_projection_recursive(alg: StarAlgebra, p0_grid) -> StarMatrix:
    """Defect-driven idempotent lift of a classical idempotent.

    At each step the defect D = P.P - P has some leading coefficient E at
    order k; associativity forces P0 E = E P0, which is asserted, and the
    correction E - P0 E - E P0 removes the order-k defect.
    """
    p0_grid = cgrid(p0_grid)
    _require_classical_idempotent(p0_grid)
    p = StarMatrix.from_classical(alg, p0_grid)
    while True:
        defect = p.star(p) - p
        k = defect.first_nonzero_order()
        if k is None:
            return p
        e = defect.grid(k)
        if not cgrid_eq(cgrid_mul(p0_grid, e), cgrid_mul(e, p0_grid)):
            raise MatrixError(
                f"defect at order {k} does not commute with the classical "
                f"projection; the product is not associative on this input")
        correction = cgrid_sub(cgrid_sub(e, cgrid_mul(p0_grid, e)),
                               cgrid_mul(e, p0_grid))
        p = p + StarMatrix.from_grid_at(alg, correction, k)


def idempotent_intertwiner(alg: StarAlgebra, p: StarMatrix,
                           p_prime: StarMatrix) -> StarMatrix:
    """U = P'.P + (1-P').(1-P), intertwining U.P = P'.U, classical part 1."""
    if not cgrid_eq(p.classical_grid(), p_prime.classical_grid()):
        raise MatrixError("idempotents have different classical parts")
    one = StarMatrix.identity(alg, p.n)
    u = p_prime.star(p) + (one - p_prime).star(one - p)
    if not cgrid_eq(u.classical_grid(), cgrid_identity(p.n)):
        raise MatrixError("intertwiner classical part is not the identity")
    if u.star(p) != p_prime.star(u):
        raise MatrixError("intertwiner identity failed; inputs are likely "
                          "not idempotent")
    return u


def factorization_core(s: StarMatrix, l0_grid, mul, l0inv_mul) -> StarMatrix:
    """Shared recursion for S = L*.L factorizations.

    mul is the algebra product (deformed matrix product, or the induced
    corner product); l0inv_mul right-multiplies a classical grid by the
    classical inverse of L0 in whichever algebra is in play.  The defect
    S - L*.L is Hermitian, so its leading coefficient b is Hermitian and
    the correction L_k = (1/2)(b L0^-1)* cancels it.
    """
    alg = s.alg
    l0_grid = cgrid(l0_grid)
    if s.adjoint() != s:
        raise MatrixError("factorization input is not Hermitian")
    if not cgrid_eq(s.grid(0),
                    cgrid_mul(cgrid_adjoint(l0_grid), l0_grid)):
        raise MatrixError("classical part does not match L0* L0")
    lmat = StarMatrix.from_classical(alg, l0_grid)
    while True:
        defect = s - mul(lmat.adjoint(), lmat)
        k = defect.first_nonzero_order()
        if k is None:
            return lmat
        b = defect.grid(k)
        if not cgrid_eq(cgrid_adjoint(b), b):
            raise MatrixError(
                f"factorization defect at order {k} is not Hermitian")
        correction = cgrid_scale(cgrid_adjoint(l0inv_mul(b)),
                                 Fraction(1, 2))
        lmat = lmat + StarMatrix.from_grid_at(alg, correction, k)


def hermitian_factorization(alg: StarAlgebra, s: StarMatrix,
                            l0_grid) -> StarMatrix:
    """Solve S = L*.L for L = L0 + O(lambda), S Hermitian, L0 invertible."""
    l0_grid = cgrid(l0_grid)
    l0_inv = cgrid_inverse(l0_grid, alg)
    lmat = factorization_core(
        s, l0_grid, mul=lambda a, b: a.star(b),
        l0inv_mul=lambda grid: cgrid_mul(grid, l0_inv))
    if lmat.adjoint().star(lmat) != s:
        raise MatrixError("factorization verification failed")
    return lmat


def deform_unitary(alg: StarAlgebra, u0_grid) -> StarMatrix:
    """Deform a classically unitary matrix into an exactly unitary one.

    Factor the identity as L*.L with classical seed U0; the factor is the
    deformed unitary (its star inverse coincides with its adjoint).
    """
    u0_grid = cgrid(u0_grid)
    n = len(u0_grid)
    ident = cgrid_identity(n)
    if not cgrid_eq(cgrid_mul(cgrid_adjoint(u0_grid), u0_grid), ident) or \
            not cgrid_eq(cgrid_mul(u0_grid, cgrid_adjoint(u0_grid)), ident):
        raise MatrixError("seed matrix is not classically unitary")
    one = StarMatrix.identity(alg, n)
    u = hermitian_factorization(alg, one, u0_grid)
    if u.star(u.adjoint()) != one:
        raise MatrixError("unitary deformation failed on the right identity")
    return u


def mat_series_inverse(alg: StarAlgebra, a: StarMatrix) -> StarMatrix:
    """Two-sided matrix star inverse, defect-driven order recursion."""
    a0_inv = cgrid_inverse(a.classical_grid(), alg)
    g = StarMatrix.from_classical(alg, a0_inv)
    one = StarMatrix.identity(alg, a.n)
    # The defect updates incrementally: corrections live in single orders,
    # so their products stay sparse.
    defect = one - a.star(g)
    while True:
        k = defect.first_nonzero_order()
        if k is None:
            break
        delta = StarMatrix.from_grid_at(
            alg, cgrid_mul(a0_inv, defect.grid(k)), k)
        g = g + delta
        defect = defect - a.star(delta)
    if g.star(a) != one:
        raise MatrixError("matrix inverse verification failed on the left")
    return g
