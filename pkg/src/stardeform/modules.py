"""Deformations of the projective module P0.A^n.

The deformed module keeps its elements as columns constrained by the
classical projection (P0 x = x coefficientwise); the isomorphism I onto
P.A^n transports the deformed product back, giving the module action, the
deformed metric, and the induced product on the endomorphism corner
P0.Mn(A).P0.  Equivalence and isometry constructions follow the same
order-recursion pattern as the matrix procedures: extract the leading
defect, cancel it classically, verify the defining identity at the end.
"""

from __future__ import annotations

from .coefficients import (
    GR_ZERO,
    coeff_eq,
    conjugate as coeff_conjugate,
    is_zero as coeff_is_zero,
)
from .series import FormalSeries
from .starproducts import StarAlgebra, StarError
from .matrices import (
    StarMatrix,
    cgrid,
    cgrid_adjoint,
    cgrid_eq,
    cgrid_identity,
    cgrid_inverse,
    cgrid_mul,
    deform_projection_fedosov,
    deform_projection_recursive,
    deform_unitary,
    factorization_core,
    idempotent_intertwiner,
    mat_series_inverse,
)


class ModuleError(StarError):
    pass


def cvec_mul(grid, vec):
    """Classical matrix times coefficient column."""
    n = len(grid)
    return tuple(
        sum((grid[i][k] * vec[k] for k in range(1, len(vec))),
            grid[i][0] * vec[0]) for i in range(n))


def col_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def col_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def col_eq(u, v) -> bool:
    return all(a == b for a, b in zip(u, v))


def col_first_nonzero(u):
    orders = [c.first_nonzero_order() for c in u]
    orders = [r for r in orders if r is not None]
    return min(orders) if orders else None


def col_coeff(u, r: int):
    return tuple(c.coeffs[r] for c in u)


def col_inner(alg, u, v):
    """Column inner product <u, v> = sum of conj(u_i) . v_i."""
    acc = alg.zero()
    for a, b in zip(u, v):
        acc = acc + alg.star(a.conjugate(), b)
    return acc


class ModuleElement:
    """Column of series satisfying the classical constraint P0 x = x."""

    __slots__ = ("dm", "col")

    def __init__(self, dm: "DeformedModule", col):
        self.dm = dm
        self.col = tuple(col)

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        return ModuleElement(self.dm, col_add(self.col, other.col))

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        return ModuleElement(self.dm, col_sub(self.col, other.col))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModuleElement):
            return NotImplemented
        return col_eq(self.col, other.col)

    __hash__ = None

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.col)

    def classical_column(self):
        return col_coeff(self.col, 0)

    def __repr__(self):
        return f"ModuleElement({list(self.col)!r})"


class DeformedModule:
    """Bundle (P0, P) realizing a deformation of the module P0.A^n."""

    def __init__(self, alg: StarAlgebra, p0_grid, p: StarMatrix):
        p0_grid = cgrid(p0_grid)
        if not cgrid_eq(cgrid_mul(p0_grid, p0_grid), p0_grid):
            raise ModuleError("classical matrix is not idempotent")
        if not cgrid_eq(p.classical_grid(), p0_grid):
            raise ModuleError("deformed projection has wrong classical part")
        if p.star(p) != p:
            raise ModuleError("P is not idempotent under the product")
        self.alg = alg
        self.p0_grid = p0_grid
        self.p = p
        self.n = p.n
        self.hermitian = (p.adjoint() == p
                          and cgrid_eq(cgrid_adjoint(p0_grid), p0_grid)
                          and alg.stack.hermitian_flag)
        self._corner_unit = None
        self._iso_basis = None

    @classmethod
    def build(cls, alg: StarAlgebra, p0_grid,
              method: str = "fedosov") -> "DeformedModule":
        if method == "fedosov":
            p = deform_projection_fedosov(alg, p0_grid)
        elif method == "recursive":
            p = deform_projection_recursive(alg, p0_grid)
        else:
            raise ModuleError(f"unknown deformation method {method!r}")
        return cls(alg, p0_grid, p)

    def _require_hermitian(self, what: str):
        if not self.hermitian:
            raise ModuleError(f"{what} needs a Hermitian deformed module")

    # -- elements ------------------------------------------------------------

    def element(self, col) -> ModuleElement:
        col = tuple(self.alg.series(c) for c in col)
        if len(col) != self.n:
            raise ModuleError("column length does not match the module")
        for r in range(self.alg.order + 1):
            vec = col_coeff(col, r)
            if not all(coeff_eq(a, b) for a, b in
                       zip(cvec_mul(self.p0_grid, vec), vec)):
                raise ModuleError(
                    f"column violates the classical constraint at order {r}")
        return ModuleElement(self, col)

    def project_column(self, col) -> ModuleElement:
        """P0-project an arbitrary column into the module, coefficientwise."""
        col = tuple(self.alg.series(c) for c in col)
        out = []
        for i in range(self.n):
            coeffs = []
            for r in range(self.alg.order + 1):
                vec = col_coeff(col, r)
                coeffs.append(cvec_mul(self.p0_grid, vec)[i])
            out.append(FormalSeries(coeffs, self.alg.order))
        return ModuleElement(self, out)

    def basis(self):
        """The spanning columns P0 e_j."""
        out = []
        for j in range(self.n):
            col = tuple(self.p0_grid[i][j] for i in range(self.n))
            out.append(ModuleElement(
                self, tuple(self.alg.series(c) for c in col)))
        return tuple(out)

    def zero_element(self) -> ModuleElement:
        return ModuleElement(
            self, tuple(self.alg.zero() for _ in range(self.n)))

    def iso_basis(self):
        """Cached image columns u_j = I(P0 e_j)."""
        if self._iso_basis is None:
            self._iso_basis = tuple(self.iso(x) for x in self.basis())
        return self._iso_basis

    # -- the isomorphism I ----------------------------------------------------

    def iso(self, x: ModuleElement):
        """I(x) = P . x, a column in the deformed image P . A^n."""
        return self.p.star_col(x.col)

    def iso_inv(self, u) -> ModuleElement:
        """Inverse of I by stripping classical parts order by order."""
        u = tuple(self.alg.series(c) for c in u)
        if len(u) != self.n:
            raise ModuleError("column length does not match the module")
        if not col_eq(self.p.star_col(u), u):
            raise ModuleError("column is not in the image of I")
        return self._strip_column(u)

    def _strip_column(self, u) -> ModuleElement:
        # Incremental remainder: subtracting I of each single-order
        # correction is exact by linearity and keeps the products sparse.
        out = self.zero_element()
        rem = u
        while True:
            k = col_first_nonzero(rem)
            if k is None:
                return out
            vec = col_coeff(rem, k)
            if not all(coeff_eq(a, b) for a, b in
                       zip(cvec_mul(self.p0_grid, vec), vec)):
                raise ModuleError(
                    f"residual at order {k} escapes the classical range; "
                    f"input is not in the image of I")
            addition = tuple(
                FormalSeries([GR_ZERO] * k + [c] + [GR_ZERO] *
                             (self.alg.order - k), self.alg.order)
                for c in vec)
            out = ModuleElement(self, col_add(out.col, addition))
            rem = col_sub(rem, self.p.star_col(addition))

    # -- action and metric ------------------------------------------------------

    def act(self, x: ModuleElement, a) -> ModuleElement:
        """Deformed right action x . a = I^{-1}(P . x . a)."""
        a = self.alg.series(a)
        u = self.p.star_col(tuple(self.alg.star(c, a) for c in x.col))
        return self.iso_inv(u)

    def metric(self, x: ModuleElement, y: ModuleElement) -> FormalSeries:
        """Deformed inner product h(x, y) = <I(x), I(y)>."""
        self._require_hermitian("the deformed metric")
        return col_inner(self.alg, self.iso(x), self.iso(y))

    def classical_metric(self, x: ModuleElement,
                         y: ModuleElement):
        """h0(x, y) = sum of conj(x_i) y_i on classical parts."""
        u = x.classical_column()
        v = y.classical_column()
        acc = GR_ZERO
        for a, b in zip(u, v):
            acc = acc + coeff_conjugate(a) * b
        return acc

    # -- the endomorphism corner ------------------------------------------------

    def corner(self, b: StarMatrix) -> StarMatrix:
        """Validate the corner constraint P0 B_r P0 = B_r per order."""
        for r in range(self.alg.order + 1):
            g = b.grid(r)
            if not cgrid_eq(cgrid_mul(cgrid_mul(self.p0_grid, g),
                                      self.p0_grid), g):
                raise ModuleError(
                    f"matrix violates the corner constraint at order {r}")
        return b

    def corner_classical(self, grid) -> StarMatrix:
        return self.corner(StarMatrix.from_classical(self.alg, grid))

    def iso_mat(self, b: StarMatrix) -> StarMatrix:
        """I on the corner: P . B . P (right projection Q = P)."""
        return self.p.star(b).star(self.p)

    def iso_mat_inv(self, l: StarMatrix) -> StarMatrix:
        """Inverse of the corner I, stripping classical parts per order."""
        if self.p.star(l).star(self.p) != l:
            raise ModuleError("matrix is not in the image of the corner I")
        return self._strip_mat(l)

    def _strip_mat(self, l: StarMatrix) -> StarMatrix:
        out = StarMatrix.zeros(self.alg, self.n)
        rem = l
        while True:
            k = rem.first_nonzero_order()
            if k is None:
                return out
            g = rem.grid(k)
            if not cgrid_eq(cgrid_mul(cgrid_mul(self.p0_grid, g),
                                      self.p0_grid), g):
                raise ModuleError(
                    f"residual at order {k} escapes the corner; input is "
                    f"not in the image of I")
            delta = StarMatrix.from_grid_at(self.alg, g, k)
            out = out + delta
            rem = rem - self.iso_mat(delta)

    def corner_mul(self, a: StarMatrix, b: StarMatrix) -> StarMatrix:
        """The induced product on the corner: I^{-1}(I(a) . I(b))."""
        # I(a) . I(b) = P.a.P.b.P because P is exactly idempotent, and
        # the product is already in the image of I, so strip directly.
        big = self.p.star(a).star(self.p.star(b)).star(self.p)
        return self._strip_mat(big)

    def corner_unit(self) -> StarMatrix:
        """The unit of the induced corner product, I^{-1}(P).

        Classically this is P0, but the higher orders are generally
        nonzero whenever C_1(P0, P0) has a corner component.
        """
        if self._corner_unit is None:
            self._corner_unit = self._strip_mat(self.p)
        return self._corner_unit

    def corner_inverse(self, l: StarMatrix) -> StarMatrix:
        """Inverse for the induced corner product, relative to its unit."""
        full = cgrid_add_blocks(l.classical_grid(), self.p0_grid)
        m0 = cgrid_mul(cgrid_mul(self.p0_grid, cgrid_inverse(full, self.alg)),
                       self.p0_grid)
        g = StarMatrix.from_classical(self.alg, m0)
        # Run the recursion on I-transported objects: I is multiplicative
        # for the corner product and I(unit) = P, so the defect of g is
        # P - I(l).I(g) and its leading grid agrees with the corner one.
        lb = self.iso_mat(l)
        gb = self.iso_mat(g)
        defect = self.p - lb.star(gb)
        while True:
            k = defect.first_nonzero_order()
            if k is None:
                break
            delta = StarMatrix.from_grid_at(
                self.alg, cgrid_mul(m0, defect.grid(k)), k)
            g = g + delta
            db = self.iso_mat(delta)
            gb = gb + db
            defect = defect - lb.star(db)
        if gb.star(lb) != self.p:
            raise ModuleError("corner inverse failed on the left identity")
        return g

    def endo_apply(self, b: StarMatrix, x: ModuleElement) -> ModuleElement:
        """Endomorphism action through I: b |> x = I^{-1}(I(b) . I(x))."""
        return self.iso_inv(self.iso_mat(b).star_col(self.iso(x)))


def cgrid_add_blocks(corner_grid, p0_grid):
    """corner + (1 - P0), the full-matrix extension of a corner element."""
    n = len(p0_grid)
    ident = cgrid_identity(n)
    return tuple(tuple(corner_grid[i][j] + ident[i][j] - p0_grid[i][j]
                       for j in range(n)) for i in range(n))


# -- cochain expansion of I (independent cross-check) --------------------------

def cochain_mat(cochain, grid_a, grid_b):
    """Apply a scalar bilinear cochain in matrix-product pattern."""
    n = len(grid_a)
    m = len(grid_b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = GR_ZERO
            for k in range(len(grid_b)):
                term = cochain.apply(grid_a[i][k], grid_b[k][j])
                if not coeff_is_zero(term):
                    acc = acc + term
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def iso_cochain_expansion(dm: DeformedModule, q: StarMatrix,
                          b: StarMatrix) -> StarMatrix:
    """I(B) = P . B . Q computed purely from the cochain stack.

    Coefficient r collects C_m(C_k(P_i, B_s), Q_j) over i+j+k+m+s = r.
    This is an independent evaluation path used to cross-check the direct
    matrix product.
    """
    alg = dm.alg
    n = alg.order
    out = []
    for r in range(n + 1):
        acc = None
        for s in range(r + 1):
            bs = b.grid(s)
            for i in range(r - s + 1):
                pi = dm.p.grid(i)
                for k in range(r - s - i + 1):
                    inner = cochain_mat(alg.cochain(k), pi, bs)
                    for m in range(r - s - i - k + 1):
                        j = r - s - i - k - m
                        term = cochain_mat(alg.cochain(m), inner, q.grid(j))
                        acc = term if acc is None else \
                            tuple(tuple(x + y for x, y in zip(ra, rb))
                                  for ra, rb in zip(acc, term))
        out.append(acc)
    rows = tuple(tuple(
        FormalSeries([out[r][i][j] for r in range(n + 1)], n)
        for j in range(b.n)) for i in range(b.n))
    return StarMatrix(alg, rows)


# -- equivalences ---------------------------------------------------------------

class ModuleMap:
    """x -> I_dst^{-1}(U . I_src(x)) for an intertwiner U."""

    __slots__ = ("src", "dst", "u", "_inv")

    def __init__(self, src: DeformedModule, dst: DeformedModule,
                 u: StarMatrix):
        self.src = src
        self.dst = dst
        self.u = u
        self._inv = None

    def apply(self, x: ModuleElement) -> ModuleElement:
        return self.dst.iso_inv(self.u.star_col(self.src.iso(x)))

    def inverse(self) -> "ModuleMap":
        if self._inv is None:
            self._inv = ModuleMap(self.dst, self.src,
                                  mat_series_inverse(self.src.alg, self.u))
        return self._inv


def module_equivalence(dm: DeformedModule,
                       dm_prime: DeformedModule) -> ModuleMap:
    """Equivalence of two deformations of one projection.

    The intertwiner U = P'.P + (1-P').(1-P) conjugates the module
    structures: T(x . a) = T(x) .' a holds exactly.
    """
    if dm.alg is not dm_prime.alg and dm.alg.order != dm_prime.alg.order:
        raise ModuleError("modules live over different algebras")
    if not cgrid_eq(dm.p0_grid, dm_prime.p0_grid):
        raise ModuleError("modules deform different classical projections")
    u = idempotent_intertwiner(dm.alg, dm.p, dm_prime.p)
    return ModuleMap(dm, dm_prime, u)


class HermitianEquivalence:
    """Isometric equivalence: T_iso = T after the corner factor W.

    G is the metric pullback h'(Tx, Ty) = h(x, G |> y); G factors as
    W_f* .' W_f and W is the corner inverse of W_f, so conjugating by W
    flattens the pullback to the corner unit.
    """

    __slots__ = ("t", "g", "w_factor", "w")

    def __init__(self, t: ModuleMap, g: StarMatrix, w_factor: StarMatrix,
                 w: StarMatrix):
        self.t = t
        self.g = g
        self.w_factor = w_factor
        self.w = w

    def apply(self, x: ModuleElement) -> ModuleElement:
        return self.t.apply(self.t.src.endo_apply(self.w, x))

    def inverse_apply(self, u: ModuleElement) -> ModuleElement:
        return self.t.src.endo_apply(self.w_factor,
                                     self.t.inverse().apply(u))


def extract_endo_from_metric(dm: DeformedModule, target) -> StarMatrix:
    """Corner G with h(e_j, G |> e_k) = target(j, k), by order recursion.

    target(j, k) returns the wanted FormalSeries on the spanning columns
    P0 e_j.  Inconsistent targets (no corner solution) raise ModuleError.
    """
    dm._require_hermitian("metric pullback extraction")
    basis_u = dm.iso_basis()
    n = dm.n
    alg = dm.alg
    wanted = [[alg.series(target(j, k)) for k in range(n)]
              for j in range(n)]
    # h(e_j, G |> e_k) = <u_j, I(G) . u_k>, tracked incrementally: each
    # single-order correction to G contributes one sparse column product.
    have = [[alg.zero() for _ in range(n)] for _ in range(n)]
    g = StarMatrix.zeros(alg, n)
    for r in range(alg.order + 1):
        grid_r = tuple(tuple((wanted[j][k] - have[j][k]).coeffs[r]
                             for k in range(n)) for j in range(n))
        if cgrid_is_zero_like(grid_r):
            continue
        if not cgrid_eq(cgrid_mul(cgrid_mul(dm.p0_grid, grid_r),
                                  dm.p0_grid), grid_r):
            raise ModuleError(
                f"metric pullback at order {r} has no corner solution; "
                f"the spanning-set equations are inconsistent")
        delta = StarMatrix.from_grid_at(alg, grid_r, r)
        g = g + delta
        db = dm.iso_mat(delta)
        for k in range(n):
            w = db.star_col(basis_u[k])
            for j in range(n):
                have[j][k] = have[j][k] + col_inner(alg, basis_u[j], w)
    gb = dm.iso_mat(g)
    for k in range(n):
        w = gb.star_col(basis_u[k])
        for j in range(n):
            if col_inner(alg, basis_u[j], w) != wanted[j][k]:
                raise ModuleError("metric pullback verification failed")
    return g


def cgrid_is_zero_like(g) -> bool:
    return all(coeff_is_zero(x) for row in g for x in row)


def extract_endo_from_action(dm: DeformedModule, fn) -> StarMatrix:
    """Corner B with B |> x = fn(x), solved on the spanning columns."""
    basis = dm.basis()
    wanted_u = [dm.iso(fn(basis[k])) for k in range(dm.n)]
    return extract_endo_from_iso_targets(dm, wanted_u)


def extract_endo_from_iso_targets(dm: DeformedModule, wanted_u) -> StarMatrix:
    """Corner B with I(B) . u_k = wanted_u[k] on the image columns u_k.

    Extraction and verification both run in the image of I, where the
    endomorphism action is a plain matrix product; I is injective, so the
    identity holds back in the module.
    """
    basis_u = dm.iso_basis()
    n = dm.n
    alg = dm.alg
    have = [tuple(alg.zero() for _ in range(n)) for _ in range(n)]
    b = StarMatrix.zeros(alg, n)
    for r in range(alg.order + 1):
        cols = [col_coeff(col_sub(wanted_u[k], have[k]), r)
                for k in range(n)]
        grid_r = tuple(tuple(cols[k][i] for k in range(n)) for i in range(n))
        if cgrid_is_zero_like(grid_r):
            continue
        if not cgrid_eq(cgrid_mul(grid_r, dm.p0_grid), grid_r) or \
                not cgrid_eq(cgrid_mul(dm.p0_grid, grid_r), grid_r):
            raise ModuleError(
                f"action values at order {r} are not right-linear over the "
                f"spanning relations; no corner endomorphism exists")
        delta = StarMatrix.from_grid_at(alg, grid_r, r)
        b = b + delta
        db = dm.iso_mat(delta)
        for k in range(n):
            have[k] = col_add(have[k], db.star_col(basis_u[k]))
    bb = dm.iso_mat(b)
    for k in range(n):
        if not col_eq(bb.star_col(basis_u[k]), wanted_u[k]):
            raise ModuleError("endomorphism extraction verification failed")
    return b


def hermitian_equivalence(dm: DeformedModule,
                          dm_prime: DeformedModule) -> HermitianEquivalence:
    """Upgrade the module equivalence to an exact isometry."""
    dm._require_hermitian("hermitian equivalence")
    dm_prime._require_hermitian("hermitian equivalence")
    t = module_equivalence(dm, dm_prime)

    # I'(T x) = U . I(x), so the pulled-back metric on the spanning
    # columns is a plain column inner product of the images.
    tu = [t.u.star_col(u) for u in dm.iso_basis()]
    pulled_grid = [[col_inner(dm.alg, tu[j], tu[k]) for k in range(dm.n)]
                   for j in range(dm.n)]
    g = extract_endo_from_metric(dm, lambda j, k: pulled_grid[j][k])
    if g.adjoint() != g:
        raise ModuleError("metric pullback is not Hermitian")
    w_factor = factorization_core(
        g, dm.p0_grid, mul=dm.corner_mul,
        l0inv_mul=lambda grid: cgrid_mul(grid, dm.p0_grid))
    if dm.corner_mul(w_factor.adjoint(), w_factor) != g:
        raise ModuleError("corner factorization verification failed")
    w = dm.corner_inverse(w_factor)
    return HermitianEquivalence(t, g, w_factor, w)


class IsometryDeformation:
    """Result of deforming a classical unitary into a module isometry."""

    __slots__ = ("endo", "unitary", "p_prime", "equivalence")

    def __init__(self, endo, unitary, p_prime, equivalence):
        self.endo = endo
        self.unitary = unitary
        self.p_prime = p_prime
        self.equivalence = equivalence

    def apply(self, dm: DeformedModule, x: ModuleElement) -> ModuleElement:
        return dm.endo_apply(self.endo, x)


def deform_isometry(dm: DeformedModule, v0_grid) -> IsometryDeformation:
    """Deform a classical unitary commuting with P0 into an h-isometry.

    Follows the construction: deform V0 to an exact unitary, conjugate P
    by it, connect the two modules by the isometric equivalence, and read
    the composite back as a corner endomorphism.
    """
    dm._require_hermitian("isometry deformation")
    v0_grid = cgrid(v0_grid)
    alg = dm.alg
    ident = cgrid_identity(dm.n)
    if not cgrid_eq(cgrid_mul(cgrid_adjoint(v0_grid), v0_grid), ident) or \
            not cgrid_eq(cgrid_mul(v0_grid, cgrid_adjoint(v0_grid)), ident):
        raise ModuleError("seed matrix is not classically unitary")
    if not cgrid_eq(cgrid_mul(v0_grid, dm.p0_grid),
                    cgrid_mul(dm.p0_grid, v0_grid)):
        raise ModuleError("seed unitary does not commute with P0")
    u_tilde = deform_unitary(alg, v0_grid)
    p_prime = u_tilde.star(dm.p).star(u_tilde.adjoint())
    dm_prime = DeformedModule(alg, dm.p0_grid, p_prime)
    equiv = hermitian_equivalence(dm, dm_prime)

    # The composite x -> W_f |> T^{-1}(I'^{-1}(U~ . I(x))) collapses in
    # the image of I to a single matrix factor.
    m = dm.iso_mat(equiv.w_factor).star(equiv.t.inverse().u).star(u_tilde)
    endo = extract_endo_from_iso_targets(
        dm, [m.star_col(u) for u in dm.iso_basis()])
    expected = cgrid_mul(cgrid_mul(dm.p0_grid, v0_grid), dm.p0_grid)
    if not cgrid_eq(endo.classical_grid(), expected):
        raise ModuleError("isometry deformation has wrong classical part")
    return IsometryDeformation(endo, u_tilde, p_prime, equiv)
