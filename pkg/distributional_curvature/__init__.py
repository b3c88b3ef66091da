"""
Distributional Curvature - covariant derivative, Lie bracket and Riemann
curvature as distributions on weighted chart spaces, with an identity suite

Main exports:
- parse_expr / ExprAST: expression strings with jets up to third order
- builtin_space / make_space: weighted chart spaces, test functions and vectors
- build_grid / integrate: tensor-product quadrature over the reference measure
- distr_cov_deriv, distr_lie, curvature_op, curvature_scalar, sectional_margin
- run_identity_checks, oracle_compare, convergence_study, conjecture_probe
"""

__version__ = "0.1.0"

from .expr import ExprAST, parse_expr, eval_jet, periodicity_check
from .spaces import ChartSpace, TestFunction, TestVector, builtin_space, make_space
from .geom import metric_at, riemann_oracle
from .quadrature import QuadratureGrid, build_grid, integrate
from .distr import (
    CovectorDistribution,
    ScalarDistribution,
    curvature_op,
    curvature_scalar,
    distr_cov_deriv,
    distr_lie,
    evaluate,
    sectional_margin,
)
from .suite import (
    CheckReport,
    FieldBudget,
    conjecture_probe,
    convergence_study,
    draw_field,
    oracle_compare,
    random_fields,
    run_identity_checks,
)

__all__ = [
    "ExprAST",
    "parse_expr",
    "eval_jet",
    "periodicity_check",
    "ChartSpace",
    "TestFunction",
    "TestVector",
    "builtin_space",
    "make_space",
    "metric_at",
    "riemann_oracle",
    "QuadratureGrid",
    "build_grid",
    "integrate",
    "CovectorDistribution",
    "ScalarDistribution",
    "curvature_op",
    "curvature_scalar",
    "distr_cov_deriv",
    "distr_lie",
    "evaluate",
    "sectional_margin",
    "CheckReport",
    "FieldBudget",
    "conjecture_probe",
    "convergence_study",
    "oracle_compare",
    "draw_field",
    "random_fields",
    "run_identity_checks",
]
