"""Exact deformation quantization: truncated star products over
polynomial and rational-function coefficients, deformed projections and
Hermitian modules, semiclassical brackets, and Morita-style checks.

Everything is computed in exact arithmetic; validity checks compare
terms coefficient by coefficient, never numerically.
"""

from .coefficients import (
    GaussianRational,
    Poly,
    RatFunc,
    CoefficientError,
    conjugate,
    derivative,
    format_coefficient,
    invert,
)
from .parsing import ParseError, parse_coefficient, parse_series_coefficients
from .series import FormalSeries, SeriesError
from .starproducts import (
    Cochain,
    CochainStack,
    StarAlgebra,
    StarError,
    CheckFailure,
    CheckReport,
    check_associativity,
    check_hermitian,
    check_unit,
    check_vey,
    moyal_algebra,
)
from .matrices import (
    StarMatrix,
    deform_projection_fedosov,
    deform_projection_recursive,
    deform_unitary,
    hermitian_factorization,
    idempotent_intertwiner,
    mat_series_inverse,
)
from .modules import (
    DeformedModule,
    ModuleElement,
    ModuleError,
    deform_isometry,
    hermitian_equivalence,
    module_equivalence,
)
from .semiclassical import (
    ConnectionData,
    PoissonData,
    connection_curvature,
    fibred_bracket,
    hamiltonian_field,
    module_bracket,
    module_curvature,
    poisson_bracket,
    poisson_tensor,
)
from .morita import (
    ThetaOperator,
    deform_full_witness,
    nice_identities_classical,
    nice_identities_deformed,
    theta_adjointability,
    verify_nice_identities,
    verify_strongly_full,
)
from .fixtures import bott_projection, cayley_unitary, diag_projection
from .scenarios import (
    ENGINE_VERSION,
    Report,
    ScenarioError,
    run_builtin_suite,
    run_scenario,
    run_scenario_dict,
)

__version__ = ENGINE_VERSION

__all__ = [
    "GaussianRational", "Poly", "RatFunc", "CoefficientError",
    "conjugate", "derivative", "format_coefficient", "invert",
    "ParseError", "parse_coefficient", "parse_series_coefficients",
    "FormalSeries", "SeriesError",
    "Cochain", "CochainStack", "StarAlgebra", "StarError",
    "CheckFailure", "CheckReport", "check_associativity",
    "check_hermitian", "check_unit", "check_vey", "moyal_algebra",
    "StarMatrix", "deform_projection_fedosov",
    "deform_projection_recursive", "deform_unitary",
    "hermitian_factorization", "idempotent_intertwiner",
    "mat_series_inverse",
    "DeformedModule", "ModuleElement", "ModuleError",
    "deform_isometry", "hermitian_equivalence", "module_equivalence",
    "ConnectionData", "PoissonData", "connection_curvature",
    "fibred_bracket", "hamiltonian_field", "module_bracket",
    "module_curvature", "poisson_bracket", "poisson_tensor",
    "ThetaOperator", "deform_full_witness", "nice_identities_classical",
    "nice_identities_deformed", "theta_adjointability",
    "verify_nice_identities", "verify_strongly_full",
    "bott_projection", "cayley_unitary", "diag_projection",
    "ENGINE_VERSION", "Report", "ScenarioError", "run_builtin_suite",
    "run_scenario", "run_scenario_dict",
    "__version__",
]
