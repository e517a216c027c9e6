"""Built-in fixtures and seeded sample generators.

Everything here is deterministic: the fixed objects are written out
explicitly and the "random" generators take a caller-supplied
random.Random so that suites can record and replay their seed.
"""

import random
from fractions import Fraction

from .coefficients import (
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    Poly,
    RatFunc,
)
from .series import FormalSeries
from .starproducts import StarAlgebra
from .matrices import StarMatrix, cgrid, cgrid_adjoint, cgrid_add, cgrid_mul
from .modules import DeformedModule, ModuleElement

STANDARD_VARIABLES = ("x", "p")
THETA_SYMPLECTIC = ((0, 1), (-1, 0))
THETA_ZERO = ((0, 0), (0, 0))


def _poly(variables, terms):
    clean = {}
    for exp, c in terms.items():
        if not isinstance(c, GaussianRational):
            c = GaussianRational(*c) if isinstance(c, tuple) \
                else GaussianRational(c)
        if c:
            clean[exp] = c
    return Poly(tuple(variables), clean)


def bott_projection(variables=STANDARD_VARIABLES):
    """The rank-one projection (1/(1+x^2+p^2)) [[1, x-ip], [x+ip, x^2+p^2]]."""
    x, p = variables
    one = _poly(variables, {(0, 0): 1})
    den = _poly(variables, {(0, 0): 1, (2, 0): 1, (0, 2): 1})
    top = _poly(variables, {(1, 0): 1, (0, 1): (0, -1)})
    bot = _poly(variables, {(1, 0): 1, (0, 1): (0, 1)})
    rad = _poly(variables, {(2, 0): 1, (0, 2): 1})
    return cgrid([
        [RatFunc.from_num_den(one, den), RatFunc.from_num_den(top, den)],
        [RatFunc.from_num_den(bot, den), RatFunc.from_num_den(rad, den)],
    ])


def diag_projection(diagonal):
    """A constant projection with the given 0/1 diagonal."""
    n = len(diagonal)
    return cgrid([[GR_ONE if (i == j and diagonal[i]) else GR_ZERO
                   for j in range(n)] for i in range(n)])


def cayley_unitary(variables=STANDARD_VARIABLES):
    """The classical unitary (1/(1+x^2)) [[1-x^2, -2x], [2x, 1-x^2]]."""
    den = _poly(variables, {(0, 0): 1, (2, 0): 1})
    a = _poly(variables, {(0, 0): 1, (2, 0): -1})
    b = _poly(variables, {(1, 0): -2})
    c = _poly(variables, {(1, 0): 2})
    return cgrid([
        [RatFunc.from_num_den(a, den), RatFunc.from_num_den(b, den)],
        [RatFunc.from_num_den(c, den), RatFunc.from_num_den(a, den)],
    ])


def commuting_unitary_seed(p0_grid):
    """V0 = 1 + (i-1) P0: unitary, and it commutes with P0."""
    n = len(p0_grid)
    scale = GaussianRational(-1, 1)
    return cgrid([[p0_grid[i][j] * scale + (GR_ONE if i == j else GR_ZERO)
                   for j in range(n)] for i in range(n)])


def series_matrix(alg: StarAlgebra, grids) -> StarMatrix:
    """Assemble a StarMatrix from one coefficient grid per lambda order."""
    n = len(grids[0])
    pad = [tuple((GR_ZERO,) * n for _ in range(n))] * \
        (alg.order + 1 - len(grids))
    grids = list(grids) + pad
    rows = tuple(tuple(
        FormalSeries([g[i][j] for g in grids], alg.order)
        for j in range(n)) for i in range(n))
    return StarMatrix(alg, rows)


# -- the fixed validity corpus ------------------------------------------------------

def validity_corpus(variables=STANDARD_VARIABLES):
    """Twenty polynomial triples exercising the product identities.

    The first few are worked cases with known expansions; the rest are
    drawn from a generator with a frozen seed so the corpus is fixed
    without writing sixty polynomials out longhand.
    """
    x, p = variables
    v = lambda terms: _poly(variables, terms)
    fixed = [
        (v({(1, 0): 1}), v({(0, 1): 1}), v({(1, 1): 1})),
        (v({(2, 0): 1}), v({(0, 2): 1}), v({(1, 0): 1, (0, 1): 1})),
        (v({(0, 0): 1}), v({(1, 0): 3, (0, 1): -2}), v({(2, 0): 1})),
        (v({(1, 0): 1, (0, 1): (0, 1)}), v({(1, 0): 1, (0, 1): (0, -1)}),
         v({(0, 2): 1})),
        (v({(3, 0): 1}), v({(0, 3): 1}), v({(1, 1): 1})),
        (v({(0, 0): (2, 1)}), v({(0, 0): (0, 3)}), v({(0, 0): Fraction(1, 2)})),
    ]
    rng = random.Random(582347)
    while len(fixed) < 20:
        fixed.append(tuple(random_poly(rng, variables, max_degree=3)
                           for _ in range(3)))
    return tuple(fixed)


def hermitian_corpus(variables=STANDARD_VARIABLES):
    """Pairs for the conjugation identity, derived from the corpus."""
    return tuple((f, g) for f, g, _ in validity_corpus(variables))


# -- seeded generators --------------------------------------------------------------

def random_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 9))


def random_gaussian(rng: random.Random, real_only=False) -> GaussianRational:
    re = random_fraction(rng)
    im = Fraction(0) if real_only or rng.random() < 0.5 \
        else random_fraction(rng)
    return GaussianRational(re, im)


def random_poly(rng: random.Random, variables=STANDARD_VARIABLES,
                max_degree=2, terms=3, real_only=False) -> Poly:
    nv = len(variables)
    out = {}
    for _ in range(rng.randint(1, terms)):
        exp = [0] * nv
        for _ in range(rng.randint(0, max_degree)):
            exp[rng.randrange(nv)] += 1
        out[tuple(exp)] = random_gaussian(rng, real_only)
    return _poly(variables, {e: c for e, c in out.items() if c})


def random_grid(rng: random.Random, n, variables=STANDARD_VARIABLES,
                max_degree=1, real_only=False):
    return cgrid([[random_poly(rng, variables, max_degree, 2, real_only)
                   for _ in range(n)] for _ in range(n)])


def random_hermitian_grid(rng: random.Random, n,
                          variables=STANDARD_VARIABLES, max_degree=1):
    a = random_grid(rng, n, variables, max_degree)
    return cgrid_add(a, cgrid_adjoint(a))


def random_invertible_l0(rng: random.Random, n,
                         variables=STANDARD_VARIABLES):
    """Upper triangular with nonzero constant diagonal: classically
    invertible without leaving the polynomial coefficients."""
    grid = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                c = GR_ZERO
                while not c:
                    c = random_gaussian(rng)
                row.append(Poly.const(tuple(variables), c))
            elif j > i:
                row.append(random_poly(rng, variables, max_degree=1))
            else:
                row.append(Poly.zero(tuple(variables)))
        grid.append(row)
    return cgrid(grid)


def factorization_case(rng: random.Random, alg: StarAlgebra):
    """A Hermitian series S with classical part L0* L0, plus that L0."""
    n = rng.choice((1, 2))
    l0 = random_invertible_l0(rng, n, alg.variables)
    grids = [cgrid_mul(cgrid_adjoint(l0), l0)]
    for _ in range(alg.order):
        grids.append(random_hermitian_grid(rng, n, alg.variables))
    return series_matrix(alg, grids), l0


def random_unitary_series_seed(rng: random.Random, alg: StarAlgebra):
    """Hermitian per-order perturbations for deform_unitary tests."""
    return [random_hermitian_grid(rng, 2, alg.variables)
            for _ in range(alg.order)]


def random_element(rng: random.Random, dm: DeformedModule,
                   max_degree=1) -> ModuleElement:
    col = tuple(random_poly(rng, dm.alg.variables, max_degree, 2)
                for _ in range(dm.n))
    return dm.project_column(col)


def random_corner_grid(rng: random.Random, dm: DeformedModule, max_degree=1):
    m = random_grid(rng, dm.n, dm.alg.variables, max_degree)
    return cgrid_mul(dm.p0_grid, cgrid_mul(m, dm.p0_grid))
