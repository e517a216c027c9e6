"""Scenario execution: algebra and fixture construction, task dispatch,
machine-readable reports.

A scenario is a JSON object with an algebra table, optional fixture
definitions, a seed, and a task list.  Reports are deterministic for a
fixed (scenario, seed): task entries appear in declaration order, the
JSON rendering sorts keys, and timing data is opt-in because it would
break byte-for-byte reproducibility.
"""

import json
import os
import random
import time

from .coefficients import (
    GR_ONE,
    CoefficientError,
    GaussianRational,
    Poly,
    coeff_eq,
    conjugate as coeff_conjugate,
    format_coefficient,
    is_zero as coeff_is_zero,
)
from .parsing import ParseError, check_variable_names, parse_coefficient, \
    parse_series_coefficients
from .series import FormalSeries
from .starproducts import (
    Cochain,
    CochainStack,
    StarAlgebra,
    check_associativity,
    check_hermitian,
    check_vey,
    moyal_algebra,
)
from .matrices import (
    StarMatrix,
    cgrid_eq,
    cgrid_identity,
    cgrid_is_zero,
    cgrid_mul,
    deform_projection_fedosov,
    deform_projection_recursive,
    deform_unitary,
    hermitian_factorization,
    idempotent_intertwiner,
    mat_series_inverse,
)
from .modules import (
    DeformedModule,
    col_coeff,
    cvec_mul,
    deform_isometry,
    hermitian_equivalence,
    module_equivalence,
)
from . import fixtures as fx
from . import morita
from . import semiclassical as sc

ENGINE_VERSION = "0.1.0"
MAX_SUPPORTED_ORDER = 6
SUITES = ("algebra", "matrix", "module", "semiclassical", "morita")


class ScenarioError(Exception):
    """Config, fixture, or usage problems: the scenario cannot run."""


def _require(cond, msg: str):
    if not cond:
        raise ScenarioError(msg)


def max_order_cap() -> int:
    raw = os.environ.get("STARDEFORM_MAX_ORDER")
    if raw is None:
        return MAX_SUPPORTED_ORDER
    try:
        cap = int(raw)
    except ValueError:
        raise ScenarioError(
            f"STARDEFORM_MAX_ORDER must be an integer, got {raw!r}")
    return min(cap, MAX_SUPPORTED_ORDER)


# -- config parsing -----------------------------------------------------------------

def _parse_weight(value, what: str):
    """A Gaussian-rational constant given as a number or a string."""
    if isinstance(value, bool):
        raise ScenarioError(f"{what} must be a rational constant")
    if isinstance(value, int):
        return GaussianRational(value)
    if isinstance(value, str):
        try:
            return parse_coefficient(value, ())
        except (ParseError, CoefficientError) as e:
            raise ScenarioError(f"{what}: {e}")
    raise ScenarioError(f"{what} must be a rational constant")


def _parse_real_constant(value, what: str):
    c = _parse_weight(value, what)
    if not c.is_real:
        raise ScenarioError(f"{what} must be real")
    return c.re


def _parse_coeff(text, variables, what: str):
    _require(isinstance(text, str), f"{what} must be a coefficient string")
    try:
        return parse_coefficient(text, variables)
    except ParseError as e:
        raise ScenarioError(f"{what}: {e}")


def _parse_series(text, alg: StarAlgebra, what: str) -> FormalSeries:
    _require(isinstance(text, str), f"{what} must be a series string")
    try:
        coeffs = parse_series_coefficients(text, alg.variables, alg.order)
    except ParseError as e:
        raise ScenarioError(f"{what}: {e}")
    return alg.series(coeffs)


def _parse_grid(entries, variables, what: str):
    _require(isinstance(entries, list) and entries
             and all(isinstance(r, list) for r in entries),
             f"{what} must be a non-empty array of rows")
    n = len(entries)
    _require(all(len(r) == n for r in entries), f"{what} must be square")
    return tuple(tuple(_parse_coeff(e, variables, what) for e in row)
                 for row in entries)


def _multi_index(value, nvars: int, what: str):
    _require(isinstance(value, list) and len(value) == nvars
             and all(isinstance(k, int) and k >= 0 for k in value),
             f"{what} must be a list of {nvars} derivative counts")
    return tuple(value)


def build_algebra(cfg, order_override=None) -> StarAlgebra:
    _require(isinstance(cfg, dict), "scenario needs an 'algebra' table")
    order = cfg.get("order") if order_override is None else order_override
    _require(isinstance(order, int) and not isinstance(order, bool)
             and 0 <= order <= MAX_SUPPORTED_ORDER,
             f"order must be an integer in 0..{MAX_SUPPORTED_ORDER}")
    cap = max_order_cap()
    _require(order <= cap,
             f"order {order} exceeds the STARDEFORM_MAX_ORDER cap {cap}")
    coeff_kind = cfg.get("coefficients", "poly")
    _require(coeff_kind in ("poly", "ratfunc"),
             "coefficients must be 'poly' or 'ratfunc'")
    kind = cfg.get("type", "moyal")

    if kind == "moyal":
        theta_cfg = cfg.get("theta")
        _require(isinstance(theta_cfg, list) and theta_cfg
                 and all(isinstance(r, list) and len(r) == len(theta_cfg)
                         for r in theta_cfg),
                 "moyal algebra needs a square 'theta' array")
        theta = [[_parse_real_constant(e, "theta entry") for e in row]
                 for row in theta_cfg]
        d = len(theta)
        if "n" in cfg:
            _require(cfg["n"] * 2 == d,
                     "'n' does not match the size of theta")
        variables = cfg.get("variables")
        if variables is None:
            variables = tuple(f"x{j + 1}" for j in range(d))
        try:
            variables = check_variable_names(variables)
        except CoefficientError as e:
            raise ScenarioError(str(e))
        _require(len(variables) == d,
                 "number of variables must match the size of theta")
        try:
            return moyal_algebra(theta, order, variables,
                                 coeff_kind=coeff_kind)
        except (CoefficientError, ValueError, TypeError) as e:
            raise ScenarioError(f"invalid moyal algebra: {e}")

    if kind == "custom":
        variables = cfg.get("variables")
        _require(variables is not None, "custom algebra needs 'variables'")
        try:
            variables = check_variable_names(variables)
        except CoefficientError as e:
            raise ScenarioError(str(e))
        nv = len(variables)
        terms_cfg = cfg.get("cochains")
        _require(isinstance(terms_cfg, list),
                 "custom algebra needs a 'cochains' array (orders 1..R)")
        cochains = [Cochain.pointwise(nv)]
        for r, term_list in enumerate(terms_cfg, start=1):
            _require(isinstance(term_list, list),
                     f"cochain {r} must be an array of terms")
            parsed = []
            for t in term_list:
                _require(isinstance(t, dict) and "weight" in t
                         and "left" in t and "right" in t,
                         f"cochain {r} terms need weight/left/right")
                w = _parse_weight(t["weight"], f"cochain {r} weight")
                left = _multi_index(t["left"], nv, f"cochain {r} left")
                right = _multi_index(t["right"], nv, f"cochain {r} right")
                parsed.append((w, left, right))
            cochains.append(Cochain(nv, parsed))
        while len(cochains) <= order:
            cochains.append(Cochain(nv, ()))
        try:
            stack = CochainStack(nv, cochains[: order + 1])
            return StarAlgebra(variables, stack, order,
                               coeff_kind=coeff_kind)
        except CoefficientError as e:
            raise ScenarioError(f"invalid custom algebra: {e}")

    raise ScenarioError(f"unknown algebra type {kind!r}")


def build_projection(spec, alg: StarAlgebra):
    _require(isinstance(spec, dict), "projection fixtures must be tables")
    kind = spec.get("kind", "grid")
    if kind == "bott":
        _require(len(alg.variables) == 2,
                 "the bott projection needs exactly two variables")
        _require(alg.coeff_kind == "ratfunc",
                 "the bott projection needs rational-function coefficients")
        return fx.bott_projection(alg.variables)
    if kind == "diag":
        diag = spec.get("diagonal")
        _require(isinstance(diag, list) and diag
                 and all(d in (0, 1) for d in diag),
                 "diag projection needs a 0/1 'diagonal' list")
        return fx.diag_projection(diag)
    if kind == "grid":
        return _parse_grid(spec.get("entries"), alg.variables,
                           "projection entries")
    raise ScenarioError(f"unknown projection kind {kind!r}")


def build_unitary(spec, alg: StarAlgebra):
    _require(isinstance(spec, dict), "unitary fixtures must be tables")
    kind = spec.get("kind", "grid")
    if kind == "cayley":
        _require(len(alg.variables) == 2 and alg.coeff_kind == "ratfunc",
                 "the cayley unitary needs two rational-function variables")
        return fx.cayley_unitary(alg.variables)
    if kind == "grid":
        return _parse_grid(spec.get("entries"), alg.variables,
                           "unitary entries")
    raise ScenarioError(f"unknown unitary kind {kind!r}")


class ScenarioContext:
    """Parsed scenario: the algebra, fixture stores, and caches."""

    def __init__(self, cfg, order_override=None, seed_override=None):
        _require(isinstance(cfg, dict), "scenario must be a JSON object")
        self.name = cfg.get("name", "scenario")
        _require(isinstance(self.name, str), "'name' must be a string")
        self.alg = build_algebra(cfg.get("algebra"), order_override)
        seed = cfg.get("seed", 0) if seed_override is None else seed_override
        _require(isinstance(seed, int) and not isinstance(seed, bool),
                 "'seed' must be an integer")
        self.seed = seed

        fixtures_cfg = cfg.get("fixtures", {})
        _require(isinstance(fixtures_cfg, dict), "'fixtures' must be a table")
        self.projections = {}
        for name, spec in (fixtures_cfg.get("projections") or {}).items():
            self.projections[name] = build_projection(spec, self.alg)
        self.unitaries = {}
        for name, spec in (fixtures_cfg.get("unitaries") or {}).items():
            self.unitaries[name] = build_unitary(spec, self.alg)
        self.witnesses = {}
        for name, text in (fixtures_cfg.get("witnesses") or {}).items():
            self.witnesses[name] = _parse_coeff(
                text, self.alg.variables, f"witness {name!r}")
        self.element_specs = {}
        for name, spec in (fixtures_cfg.get("elements") or {}).items():
            _require(isinstance(spec, dict) and
                     isinstance(spec.get("column"), list),
                     f"element {name!r} needs a 'column' array")
            self.element_specs[name] = spec

        tasks = cfg.get("tasks")
        _require(isinstance(tasks, list), "scenario needs a 'tasks' array")
        self.tasks = tasks
        self._modules = {}

    def projection_grid(self, params):
        name = params.get("projection")
        if name is None:
            _require(len(self.projections) == 1,
                     "task needs an explicit 'projection' fixture name")
            name = next(iter(self.projections))
        _require(name in self.projections,
                 f"unknown projection fixture {name!r}")
        return name, self.projections[name]

    def module(self, params, method="fedosov") -> DeformedModule:
        name, grid = self.projection_grid(params)
        key = (name, method)
        if key not in self._modules:
            self._modules[key] = DeformedModule.build(
                self.alg, grid, method=method)
        return self._modules[key]

    def element(self, name, dm: DeformedModule):
        spec = self.element_specs.get(name)
        _require(spec is not None, f"unknown element fixture {name!r}")
        col = [_parse_series(t, self.alg, f"element {name!r}")
               for t in spec["column"]]
        _require(len(col) == dm.n,
                 f"element {name!r} has the wrong column length")
        return dm.project_column(col)

    def witness(self, params):
        text = params.get("witness", "1")
        if text in self.witnesses:
            return self.witnesses[text]
        return _parse_coeff(text, self.alg.variables, "witness")

    def rng(self, idx: int) -> random.Random:
        return random.Random(self.seed * 1000003 + idx)


# -- task helpers -------------------------------------------------------------------

def _entry(name, failures, **extra):
    out = {"task": name, "status": "pass" if not failures else "fail"}
    out.update(extra)
    if failures:
        orders = [f["order"] for f in failures if f.get("order") is not None]
        if orders:
            out["first_failing_order"] = min(orders)
        out["failures"] = failures
    return out


def _fail(case, order=None, detail=""):
    out = {"case": case}
    if order is not None:
        out["order"] = order
    if detail:
        out["detail"] = detail
    return out


def _from_check(name, rep, **extra):
    failures = [_fail(str(f.sample) if f.sample is not None else name,
                      f.order, f.detail) for f in rep.failures]
    return _entry(name, failures, **extra)


def _sample_triples(ctx: ScenarioContext, params, idx, width):
    """Explicit coefficient-string tuples, seeded samples, or the corpus."""
    key = {1: "values", 2: "pairs", 3: "triples"}[width]
    if key in params:
        raw = params[key]
        _require(isinstance(raw, list) and
                 all(isinstance(t, list) and len(t) == width for t in raw),
                 f"'{key}' must be an array of {width}-element arrays")
        return [tuple(_parse_coeff(c, ctx.alg.variables, key) for c in t)
                for t in raw]
    if "samples" in params:
        n = params["samples"]
        _require(isinstance(n, int) and n > 0,
                 "'samples' must be a positive integer")
        rng = ctx.rng(idx)
        return [tuple(fx.random_poly(rng, ctx.alg.variables, max_degree=2)
                      for _ in range(width))
                for _ in range(n)]
    _require(len(ctx.alg.variables) == 2,
             "the built-in corpus needs a two-variable algebra; give "
             "'samples' or explicit inputs")
    corpus = fx.validity_corpus(ctx.alg.variables)
    return [t[:width] for t in corpus]


def _task_associativity(ctx, params, idx):
    triples = _sample_triples(ctx, params, idx, 3)
    return _from_check("associativity",
                       check_associativity(ctx.alg, triples),
                       samples=len(triples))


def _task_hermitian(ctx, params, idx):
    pairs = _sample_triples(ctx, params, idx, 2)
    return _from_check("hermitian", check_hermitian(ctx.alg, pairs),
                       samples=len(pairs))


def _task_vey(ctx, params, idx):
    rep = check_vey(ctx.alg)
    return _from_check(
        "vey", rep,
        observed=[list(x) for x in rep.info["observed"]],
        declared=list(rep.info["declared"]))


def _task_deform_projection(ctx, params, idx):
    name, grid = ctx.projection_grid(params)
    alg = ctx.alg
    failures = []
    p = deform_projection_fedosov(alg, grid)
    p2 = deform_projection_recursive(alg, grid)
    hermitian_expected = alg.stack.hermitian_flag and cgrid_eq(
        grid, tuple(tuple(coeff_conjugate(grid[j][i])
                          for j in range(len(grid)))
                    for i in range(len(grid))))
    for label, mat in (("closed-form", p), ("recursive", p2)):
        d = mat.star(mat).first_difference(mat)
        if d is not None:
            failures.append(_fail(f"{label} idempotency", d))
        if hermitian_expected:
            d = mat.adjoint().first_difference(mat)
            if d is not None:
                failures.append(_fail(f"{label} hermiticity", d))
        if not cgrid_eq(mat.classical_grid(), grid):
            failures.append(_fail(f"{label} classical part", 0))
    u = idempotent_intertwiner(alg, p, p2)
    d = u.star(p).first_difference(p2.star(u))
    if d is not None:
        failures.append(_fail("intertwiner identity", d))
    u_inv = mat_series_inverse(alg, u)
    one = StarMatrix.identity(alg, u.n)
    d = u.star(u_inv).first_difference(one)
    if d is not None:
        failures.append(_fail("intertwiner invertibility", d))
    return _entry("deform_projection", failures, projection=name)


def _task_factorization(ctx, params, idx):
    n = params.get("samples", 8)
    _require(isinstance(n, int) and n > 0,
             "'samples' must be a positive integer")
    rng = ctx.rng(idx)
    failures = []
    for k in range(n):
        s, l0 = fx.factorization_case(rng, ctx.alg)
        lmat = hermitian_factorization(ctx.alg, s, l0)
        d = lmat.adjoint().star(lmat).first_difference(s)
        if d is not None:
            failures.append(_fail(f"sample {k}", d))
    return _entry("factorization", failures, samples=n)


def _task_unitary_deform(ctx, params, idx):
    name = params.get("unitary")
    if name is None:
        _require(len(ctx.unitaries) == 1,
                 "task needs an explicit 'unitary' fixture name")
        name = next(iter(ctx.unitaries))
    _require(name in ctx.unitaries, f"unknown unitary fixture {name!r}")
    grid = ctx.unitaries[name]
    u = deform_unitary(ctx.alg, grid)
    one = StarMatrix.identity(ctx.alg, u.n)
    failures = []
    d = u.adjoint().star(u).first_difference(one)
    if d is not None:
        failures.append(_fail("left unitarity", d))
    d = u.star(u.adjoint()).first_difference(one)
    if d is not None:
        failures.append(_fail("right unitarity", d))
    if not cgrid_eq(u.classical_grid(), grid):
        failures.append(_fail("classical part", 0))
    return _entry("unitary_deform", failures, unitary=name)


def _task_module_laws(ctx, params, idx):
    dm = ctx.module(params)
    alg = ctx.alg
    n = params.get("samples", 5)
    _require(isinstance(n, int) and n > 0,
             "'samples' must be a positive integer")
    rng = ctx.rng(idx)
    failures = []
    c1 = alg.cochain(1)
    for k in range(n):
        x = fx.random_element(rng, dm)
        y = fx.random_element(rng, dm)
        a = fx.random_poly(rng, alg.variables)
        b = fx.random_poly(rng, alg.variables)
        if dm.act(dm.act(x, a), b) != dm.act(x, alg.star(a, b)):
            failures.append(_fail(f"action associativity {k}"))
        if dm.act(x, alg.one()) != x:
            failures.append(_fail(f"unit action {k}"))
        h = dm.metric(x, dm.act(y, a))
        d = h.first_difference(alg.star(dm.metric(x, y), a))
        if d is not None:
            failures.append(_fail(f"metric right linearity {k}", d))
        d = dm.metric(x, y).conjugate().first_difference(dm.metric(y, x))
        if d is not None:
            failures.append(_fail(f"metric conjugate symmetry {k}", d))
        got = col_coeff(dm.act(x, a).col, 1)
        want = cvec_mul(dm.p0_grid,
                        tuple(c1.apply(c, a) for c in x.classical_column()))
        if not all(coeff_eq(u, v) for u, v in zip(got, want)):
            failures.append(_fail(f"first cochain of the action {k}", 1))
    return _entry("module_laws", failures, samples=n,
                  projection=ctx.projection_grid(params)[0])


def _task_module_equivalence(ctx, params, idx):
    dm = ctx.module(params)
    dm2 = ctx.module(params, method="recursive")
    n = params.get("samples", 3)
    _require(isinstance(n, int) and n > 0,
             "'samples' must be a positive integer")
    rng = ctx.rng(idx)
    t = module_equivalence(dm, dm2)
    failures = []
    for k in range(n):
        x = fx.random_element(rng, dm)
        a = fx.random_poly(rng, ctx.alg.variables)
        if t.apply(dm.act(x, a)) != dm2.act(t.apply(x), a):
            failures.append(_fail(f"intertwines the action {k}"))
        if t.inverse().apply(t.apply(x)) != x:
            failures.append(_fail(f"inverse round trip {k}"))
        if not all(coeff_eq(u, v) for u, v in
                   zip(t.apply(x).classical_column(), x.classical_column())):
            failures.append(_fail(f"classical part {k}", 0))
    return _entry("module_equivalence", failures, samples=n)


def _task_hermitian_equivalence(ctx, params, idx):
    dm = ctx.module(params)
    dm2 = ctx.module(params, method="recursive")
    n = params.get("samples", 3)
    _require(isinstance(n, int) and n > 0,
             "'samples' must be a positive integer")
    rng = ctx.rng(idx)
    equiv = hermitian_equivalence(dm, dm2)
    failures = []
    for k in range(n):
        x = fx.random_element(rng, dm)
        y = fx.random_element(rng, dm)
        d = dm2.metric(equiv.apply(x), equiv.apply(y)).first_difference(
            dm.metric(x, y))
        if d is not None:
            failures.append(_fail(f"isometry {k}", d))
        if equiv.inverse_apply(equiv.apply(x)) != x:
            failures.append(_fail(f"inverse round trip {k}"))
    return _entry("hermitian_equivalence", failures, samples=n)


def _task_isometry_deform(ctx, params, idx):
    dm = ctx.module(params)
    name = params.get("unitary")
    if name is not None:
        _require(name in ctx.unitaries, f"unknown unitary fixture {name!r}")
        v0 = ctx.unitaries[name]
    else:
        v0 = fx.commuting_unitary_seed(dm.p0_grid)
        name = "1 + (i-1) P0"
    n = params.get("samples", 2)
    _require(isinstance(n, int) and n > 0,
             "'samples' must be a positive integer")
    rng = ctx.rng(idx)
    iso = deform_isometry(dm, v0)
    failures = []
    unit = dm.corner_unit()
    w = iso.endo
    if dm.corner_mul(w.adjoint(), w) != unit:
        failures.append(_fail("corner unitarity"))
    for k in range(n):
        x = fx.random_element(rng, dm)
        y = fx.random_element(rng, dm)
        d = dm.metric(dm.endo_apply(w, x), dm.endo_apply(w, y)) \
            .first_difference(dm.metric(x, y))
        if d is not None:
            failures.append(_fail(f"metric preservation {k}", d))
    return _entry("isometry_deform", failures, samples=n, unitary=name)


def _task_poisson_checks(ctx, params, idx):
    alg = ctx.alg
    n = params.get("samples", 5)
    _require(isinstance(n, int) and n > 0,
             "'samples' must be a positive integer")
    rng = ctx.rng(idx)
    failures = []
    theta = sc.poisson_tensor(alg)
    nv = len(alg.variables)
    for j in range(nv):
        for k in range(nv):
            vj = Poly.variable(alg.variables, alg.variables[j])
            vk = Poly.variable(alg.variables, alg.variables[k])
            got = sc.poisson_bracket(alg, vj, vk)
            if not coeff_eq(got, Poly.const(alg.variables, theta[j][k])):
                failures.append(_fail(
                    f"coordinate bracket ({alg.variables[j]},"
                    f"{alg.variables[k]})"))
    for k in range(n):
        f = fx.random_poly(rng, alg.variables, max_degree=2)
        g = fx.random_poly(rng, alg.variables, max_degree=2)
        h = fx.random_poly(rng, alg.variables, max_degree=2)
        br = lambda a, b: sc.poisson_bracket(alg, a, b)
        if not coeff_is_zero(br(f, g) + br(g, f)):
            failures.append(_fail(f"antisymmetry {k}"))
        if not coeff_eq(br(f, g * h), br(f, g) * h + br(f, h) * g):
            failures.append(_fail(f"leibniz {k}"))
        jac = br(f, br(g, h)) + br(g, br(h, f)) + br(h, br(f, g))
        if not coeff_is_zero(jac):
            failures.append(_fail(f"jacobi {k}"))
        if not coeff_eq(coeff_conjugate(br(f, g)),
                        br(coeff_conjugate(f), coeff_conjugate(g))):
            failures.append(_fail(f"reality {k}"))
    return _entry("poisson_checks", failures, samples=n)


def _task_module_bracket_checks(ctx, params, idx):
    dm = ctx.module(params)
    alg = ctx.alg
    n = params.get("samples", 4)
    _require(isinstance(n, int) and n > 0,
             "'samples' must be a positive integer")
    rng = ctx.rng(idx)
    failures = []
    one = GR_ONE
    for k in range(n):
        x = fx.random_element(rng, dm)
        f = fx.random_poly(rng, alg.variables, max_degree=2)
        g = fx.random_poly(rng, alg.variables, max_degree=2)
        if sc.module_bracket(dm, x, f) != sc.module_bracket_via_action(
                dm, x, f):
            failures.append(_fail(f"agreement with the deformed action {k}"))
        if not sc.module_bracket(dm, x, one).is_zero:
            failures.append(_fail(f"bracket with a constant {k}"))
        lhs = sc.module_bracket(dm, sc.scale_element(x, g), f)
        rhs = sc.scale_element(sc.module_bracket(dm, x, f), g) + \
            sc.scale_element(x, sc.poisson_bracket(alg, g, f))
        if lhs != rhs:
            failures.append(_fail(f"module leibniz {k}"))
        lhs = sc.module_bracket(dm, x, f * g)
        rhs = sc.scale_element(sc.module_bracket(dm, x, f), g) + \
            sc.scale_element(sc.module_bracket(dm, x, g), f)
        if lhs != rhs:
            failures.append(_fail(f"coefficient leibniz {k}"))
    return _entry("module_bracket_checks", failures, samples=n,
                  projection=ctx.projection_grid(params)[0])


def _task_curvature_compare(ctx, params, idx):
    dm = ctx.module(params)
    alg = ctx.alg
    expect = params.get("expect")
    _require(expect in (None, "nonzero", "flat"),
             "'expect' must be 'nonzero' or 'flat'")
    if "pairs" in params:
        pairs = _sample_triples(ctx, params, idx, 2)
    else:
        _require(len(alg.variables) == 2,
                 "default curvature pairs need a two-variable algebra")
        a = Poly.variable(alg.variables, alg.variables[0])
        b = Poly.variable(alg.variables, alg.variables[1])
        pairs = [(a, b), (a * a, b), (a, a * b)]
    cd = sc.ConnectionData(dm)
    failures = []
    saw_nonzero = False
    for k, (f, g) in enumerate(pairs):
        xf = sc.hamiltonian_field(alg, f)
        xg = sc.hamiltonian_field(alg, g)
        for j, e in enumerate(dm.basis()):
            rm = sc.module_curvature(dm, f, g, e)
            rc = sc.connection_curvature(cd, xf, xg, e)
            if rm != rc:
                failures.append(_fail(f"pair {k}", None, f"basis index {j}"))
            if not rm.is_zero:
                saw_nonzero = True
            if expect == "flat" and not rm.is_zero:
                failures.append(_fail(f"pair {k} not flat", None,
                                      f"basis index {j}"))
        if not sc.module_curvature(dm, f, f, dm.basis()[0]).is_zero:
            failures.append(_fail(f"pair {k} antisymmetry"))
        # the bracket route and the connection route to nabla agree
        e = dm.basis()[0]
        if sc.levi_civita(cd, xf, e) != sc.module_bracket(dm, e, f):
            failures.append(_fail(f"pair {k} hamiltonian direction"))
    if expect == "nonzero" and not saw_nonzero:
        failures.append(_fail("expected a nonvanishing curvature"))
    return _entry("curvature_compare", failures, pairs=len(pairs),
                  projection=ctx.projection_grid(params)[0])


def _task_fibred_bracket_checks(ctx, params, idx):
    dm = ctx.module(params)
    alg = ctx.alg
    n = params.get("samples", 3)
    _require(isinstance(n, int) and n > 0,
             "'samples' must be a positive integer")
    rng = ctx.rng(idx)
    failures = []
    one = Poly.const(alg.variables, GR_ONE)
    for k in range(n):
        l0 = fx.random_corner_grid(rng, dm)
        f = fx.random_poly(rng, alg.variables, max_degree=2)
        g = fx.random_poly(rng, alg.variables, max_degree=2)
        # routes compared inside fibred_bracket; a mismatch raises
        got = sc.fibred_bracket(dm, sc.center_element(dm, f),
                                sc.center_element(dm, g))
        want = sc.center_element(dm, sc.poisson_bracket(alg, f, g))
        if not cgrid_eq(got, want):
            failures.append(_fail(f"center law {k}"))
        if not cgrid_is_zero(
                sc.fibred_bracket(dm, l0, sc.center_element(dm, one))):
            failures.append(_fail(f"constant center {k}"))
        sc.fibred_bracket(dm, l0, sc.center_element(dm, f))
        if not sc.corner_first_cochain_identity(
                dm, l0, fx.random_corner_grid(rng, dm)):
            failures.append(_fail(f"first corner cochain {k}"))
    return _entry("fibred_bracket_checks", failures, samples=n,
                  projection=ctx.projection_grid(params)[0])


def _task_strong_fullness(ctx, params, idx):
    name, grid = ctx.projection_grid(params)
    tau0 = ctx.witness(params)
    rep = morita.strongly_full_classical(grid, tau0)
    failures = [_fail(f"classical: {f.sample}", f.order, f.detail)
                for f in rep.failures]
    extra = {"projection": name}
    deformed = params.get("deformed", True)
    _require(isinstance(deformed, bool), "'deformed' must be a boolean")
    if deformed and not failures:
        dm = ctx.module(params)
        tau = morita.deform_full_witness(dm, tau0)
        drep = morita.strongly_full_deformed(dm, tau)
        failures.extend(_fail(f"deformed: {f.sample}", f.order, f.detail)
                        for f in drep.failures)
        extra["deformed_witness"] = [format_coefficient(c)
                                     for c in tau.coeffs]
    return _entry("strong_fullness", failures, **extra)


def _nice_sample_pairs(ctx, params, idx, dm):
    pairs = [(x, y) for x in dm.basis() for y in dm.basis()]
    extra = params.get("samples", 0)
    _require(isinstance(extra, int) and extra >= 0,
             "'samples' must be a non-negative integer")
    rng = ctx.rng(idx)
    for _ in range(extra):
        pairs.append((fx.random_element(rng, dm),
                      fx.random_element(rng, dm)))
    names = params.get("elements")
    if names is not None:
        _require(isinstance(names, list) and
                 all(isinstance(t, list) and len(t) == 2 for t in names),
                 "'elements' must be an array of [name, name] pairs")
        for a, b in names:
            pairs.append((ctx.element(a, dm), ctx.element(b, dm)))
    return pairs


def _task_nice_identities(ctx, params, idx):
    dm = ctx.module(params)
    tau0 = ctx.witness(params)
    pairs = _nice_sample_pairs(ctx, params, idx, dm)
    crep = morita.nice_identities_classical(dm, tau0, pairs)
    failures = [_fail(f"classical: {f.sample}", f.order, f.detail)
                for f in crep.failures]
    deformed = params.get("deformed", True)
    _require(isinstance(deformed, bool), "'deformed' must be a boolean")
    if deformed:
        tau = morita.deform_full_witness(dm, tau0)
        drep = morita.nice_identities_deformed(dm, tau, pairs)
        failures.extend(_fail(f"deformed: {f.sample}", f.order, f.detail)
                        for f in drep.failures)
    return _entry("nice_identities", failures, pairs=len(pairs),
                  projection=ctx.projection_grid(params)[0])


def _task_theta_adjoint(ctx, params, idx):
    dm = ctx.module(params)
    n = params.get("samples", 3)
    _require(isinstance(n, int) and n > 0,
             "'samples' must be a positive integer")
    rng = ctx.rng(idx)
    failures = []
    basis = dm.basis()
    quads = [(basis[0], basis[-1], basis[-1], basis[0]),
             (basis[0], basis[0], basis[-1], basis[-1]),
             (basis[0], basis[-1], dm.zero_element(), basis[0])]
    for _ in range(n):
        quads.append(tuple(fx.random_element(rng, dm) for _ in range(4)))
    for k, (x, y, z, w) in enumerate(quads):
        rep = morita.theta_adjointability(dm, x, y, z, w)
        failures.extend(_fail(f"quadruple {k}", f.order, f.detail)
                        for f in rep.failures)
    return _entry("theta_adjoint", failures, samples=len(quads),
                  projection=ctx.projection_grid(params)[0])


TASKS = {
    "associativity": _task_associativity,
    "hermitian": _task_hermitian,
    "vey": _task_vey,
    "deform_projection": _task_deform_projection,
    "factorization": _task_factorization,
    "unitary_deform": _task_unitary_deform,
    "module_laws": _task_module_laws,
    "module_equivalence": _task_module_equivalence,
    "hermitian_equivalence": _task_hermitian_equivalence,
    "isometry_deform": _task_isometry_deform,
    "poisson_checks": _task_poisson_checks,
    "module_bracket_checks": _task_module_bracket_checks,
    "curvature_compare": _task_curvature_compare,
    "fibred_bracket_checks": _task_fibred_bracket_checks,
    "strong_fullness": _task_strong_fullness,
    "nice_identities": _task_nice_identities,
    "theta_adjoint": _task_theta_adjoint,
}


# -- runners ------------------------------------------------------------------------

class Report:
    """A finished run: JSON payload plus the overall verdict."""

    def __init__(self, payload: dict, passed: bool):
        self.payload = payload
        self.passed = passed

    def to_json(self) -> str:
        return json.dumps(self.payload, indent=2, sort_keys=True) + "\n"


def _run_tasks(ctx: ScenarioContext, timings: bool):
    entries = []
    for idx, tcfg in enumerate(ctx.tasks):
        _require(isinstance(tcfg, dict), "each task must be a table")
        name = tcfg.get("task")
        _require(isinstance(name, str), "each task needs a 'task' name")
        fn = TASKS.get(name)
        if fn is None:
            raise ScenarioError(f"unknown task {name!r}")
        start = time.perf_counter()
        try:
            entry = fn(ctx, tcfg, idx)
        except ScenarioError:
            raise
        except CoefficientError as e:
            entry = {"task": name, "status": "error", "detail": str(e)}
        if timings:
            entry["time_ms"] = round((time.perf_counter() - start) * 1000, 3)
        entries.append(entry)
    return entries


def run_scenario_dict(cfg, order_override=None, seed_override=None,
                      timings=False) -> Report:
    ctx = ScenarioContext(cfg, order_override, seed_override)
    entries = _run_tasks(ctx, timings)
    passed = all(e["status"] == "pass" for e in entries)
    payload = {
        "engine": f"stardeform {ENGINE_VERSION}",
        "kind": "scenario",
        "name": ctx.name,
        "order": ctx.alg.order,
        "seed": ctx.seed,
        "status": "pass" if passed else "fail",
        "tasks": entries,
    }
    return Report(payload, passed)


def load_scenario_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file: {e}")
    except json.JSONDecodeError as e:
        raise ScenarioError(
            f"scenario is not valid JSON (line {e.lineno}, column "
            f"{e.colno}): {e.msg}")


def run_scenario(path: str, order_override=None, seed_override=None,
                 timings=False) -> Report:
    return run_scenario_dict(load_scenario_file(path), order_override,
                             seed_override, timings)


# -- built-in suites ----------------------------------------------------------------

def builtin_scenario(suite: str, seed: int) -> dict:
    bott = {"kind": "bott"}
    if suite == "algebra":
        return {
            "name": "builtin-algebra",
            "algebra": {"type": "moyal", "theta": [[0, 1], [-1, 0]],
                        "order": 4, "variables": ["x", "p"],
                        "coefficients": "poly"},
            "seed": seed,
            "tasks": [
                {"task": "associativity"},
                {"task": "hermitian"},
                {"task": "vey"},
                {"task": "associativity", "samples": 6},
                {"task": "hermitian", "samples": 6},
            ],
        }
    if suite == "matrix":
        return {
            "name": "builtin-matrix",
            "algebra": {"type": "moyal", "theta": [[0, 1], [-1, 0]],
                        "order": 3, "variables": ["x", "p"],
                        "coefficients": "ratfunc"},
            "seed": seed,
            "fixtures": {"projections": {"bott": bott},
                         "unitaries": {"cayley": {"kind": "cayley"}}},
            "tasks": [
                {"task": "deform_projection", "projection": "bott"},
                {"task": "factorization", "samples": 6},
                {"task": "unitary_deform", "unitary": "cayley"},
            ],
        }
    if suite == "module":
        return {
            "name": "builtin-module",
            "algebra": {"type": "moyal", "theta": [[0, 1], [-1, 0]],
                        "order": 3, "variables": ["x", "p"],
                        "coefficients": "ratfunc"},
            "seed": seed,
            "fixtures": {"projections": {"bott": bott}},
            "tasks": [
                {"task": "module_laws", "samples": 4},
                {"task": "module_equivalence", "samples": 3},
                {"task": "hermitian_equivalence", "samples": 3},
                {"task": "isometry_deform", "samples": 2},
            ],
        }
    if suite == "semiclassical":
        return {
            "name": "builtin-semiclassical",
            "algebra": {"type": "moyal", "theta": [[0, 1], [-1, 0]],
                        "order": 2, "variables": ["x", "p"],
                        "coefficients": "ratfunc"},
            "seed": seed,
            "fixtures": {"projections": {
                "bott": bott,
                "flat": {"kind": "diag", "diagonal": [1, 0]},
            }},
            "tasks": [
                {"task": "poisson_checks", "samples": 5},
                {"task": "module_bracket_checks", "projection": "bott",
                 "samples": 4},
                {"task": "curvature_compare", "projection": "bott",
                 "expect": "nonzero"},
                {"task": "curvature_compare", "projection": "flat",
                 "expect": "flat"},
                {"task": "fibred_bracket_checks", "projection": "bott",
                 "samples": 3},
            ],
        }
    if suite == "morita":
        return {
            "name": "builtin-morita",
            "algebra": {"type": "moyal", "theta": [[0, 1], [-1, 0]],
                        "order": 3, "variables": ["x", "p"],
                        "coefficients": "ratfunc"},
            "seed": seed,
            "fixtures": {"projections": {
                "bott": bott,
                "rank1": {"kind": "diag", "diagonal": [1, 0]},
            }},
            "tasks": [
                {"task": "strong_fullness", "projection": "bott",
                 "witness": "1"},
                {"task": "strong_fullness", "projection": "rank1",
                 "witness": "1"},
                {"task": "nice_identities", "projection": "bott",
                 "witness": "1", "samples": 2},
                {"task": "theta_adjoint", "projection": "bott",
                 "samples": 2},
            ],
        }
    raise ScenarioError(f"unknown suite {suite!r}")


def run_builtin_suite(suite: str, seed: int = 0, timings=False) -> Report:
    names = list(SUITES) if suite == "all" else [suite]
    if suite != "all" and suite not in SUITES:
        raise ScenarioError(
            f"unknown suite {suite!r}; choose from "
            f"{', '.join(SUITES + ('all',))}")
    sections = []
    passed = True
    for name in names:
        cfg = builtin_scenario(name, seed)
        rep = run_scenario_dict(cfg, timings=timings)
        passed = passed and rep.passed
        sections.append({
            "suite": name,
            "order": rep.payload["order"],
            "status": rep.payload["status"],
            "tasks": rep.payload["tasks"],
        })
    payload = {
        "engine": f"stardeform {ENGINE_VERSION}",
        "kind": "suite",
        "name": suite,
        "seed": seed,
        "status": "pass" if passed else "fail",
        "suites": sections,
    }
    return Report(payload, passed)
