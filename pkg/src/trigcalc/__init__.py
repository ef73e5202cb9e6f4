"""Symbolic-numeric calculus for trigonometric series.

Expressions are parsed or built as immutable trees, differentiated
symbolically, and integrated by refinement quadrature; definite integrals
evaluate through verified antiderivatives with a mandatory numeric
cross-check.  On top of that sit the trigonometric orthogonality relations,
Fourier coefficient recovery with a uniqueness check, the sum rule for
integrating indexed sums, and convergence diagnostics (pointwise/uniform
reports, a Dini-theorem precondition checker, uniform-limit continuity,
overspill-style threshold scans, and the sum rule for infinite series).
"""

from .errors import (
    ArgumentError, CalcError, ConfigurationError, ConstraintError,
    ContractError, DomainError, EvalError, ParseError, UnboundParameterError,
)
from .expr import (
    Add, Const, Cos, Div, Expr, IntPow, Interval, Mul, Neg, PI, Param,
    ParamEnv, Pi, Sin, Sub, Var, X, cos, eval_expr, eval_on_grid,
    fold_constants, free_params, num, param, parse_expr, sin, substitute,
    to_text,
)
from .symdiff import DerivativeCheckReport, check_derivative, differentiate, simplify
from .riemann import (
    IntegralEstimate, Partition, extreme_bounds, integrate_refine,
    integrate_signed, make_partition, riemann_sum,
)
from .ftc import (
    AntiderivativeEntry, ContinuityReport, FtcReport, ParamConstraint,
    Registry, builtin_registry, continuity_probe, ftc1_probe, ftc2_evaluate,
    register_antiderivative,
)
from .fourier import (
    FourierCoefficients, TrigPoly, coeffs_numeric, fourier_sum_eval,
    orthogonality_case, orthogonality_integral, orthogonality_integrand,
    orthogonality_numeric_check, sum_rule_finite_check, synth_expr,
    uniqueness_check,
)
from .converge import (
    ConvergenceReport, FunctionSequence, InfiniteSumRuleReport,
    MonotoneReport, UniformReport, dini_report, infinite_sum_rule_check,
    limit_continuity_check, monotone_check, overspill_threshold,
    partial_sum_eval, sup_ladder_csv, uniform_report,
)

__version__ = "0.1.0"
