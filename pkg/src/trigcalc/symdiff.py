"""Symbolic differentiation with respect to x, and its numeric verification.

:func:`differentiate` applies the structural rules (sum, product, quotient,
chain, integer power) without any cleanup, so a derivative of sin(n*x)
comes out as cos(n*x)*(n*1 + x*0).  :func:`simplify` supplies the cleanup
as a terminating rewrite system.  :func:`check_derivative` is the numeric
counterpart of the proof obligation f(x) = (g(x) - g(y))/(x - y) for y
near x: a central-difference sweep over several step sizes, with the best
step taken per sample point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ArgumentError
from .expr import (
    Add, Const, Cos, Div, Expr, IntPow, Interval, Mul, Neg, Param, ParamEnv,
    Pi, Sin, Sub, Var, eval_on_grid, _fold_node,
)

__all__ = ["differentiate", "simplify", "check_derivative", "DerivativeCheckReport"]

_ZERO = Const(Fraction(0))
_ONE = Const(Fraction(1))


def differentiate(e: Expr) -> Expr:
    """Partial derivative of ``e`` with respect to x; parameters are held
    constant.  Total on the expression language; output is un-simplified."""
    match e:
        case Const() | Pi() | Param():
            return _ZERO
        case Var():
            return _ONE
        case Neg(arg=a):
            return Neg(differentiate(a))
        case Add(lhs=l, rhs=r):
            return Add(differentiate(l), differentiate(r))
        case Sub(lhs=l, rhs=r):
            return Sub(differentiate(l), differentiate(r))
        case Mul(lhs=l, rhs=r):
            return Add(Mul(l, differentiate(r)), Mul(r, differentiate(l)))
        case Div(lhs=l, rhs=r):
            return Div(Sub(Mul(differentiate(l), r), Mul(l, differentiate(r))),
                       IntPow(r, 2))
        case IntPow(base=b, exponent=k):
            if k == 0:
                return _ZERO
            return Mul(Mul(Const(Fraction(k)), IntPow(b, k - 1)), differentiate(b))
        case Sin(arg=a):
            return Mul(Cos(a), differentiate(a))
        case Cos(arg=a):
            return Neg(Mul(Sin(a), differentiate(a)))
    raise TypeError(f"not an expression node: {e!r}")


def _rank(e: Expr) -> int:
    # product-ordering rank: constants first, then pi, parameters, x, compounds
    match e:
        case Const():
            return 0
        case Pi():
            return 1
        case Param():
            return 2
        case Var():
            return 3
    return 4


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


def _is_one(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 1


def _rewrite(e: Expr) -> Expr:
    """One local rewrite at the root (children assumed already simplified)."""
    e = _fold_node(e)
    match e:
        case Neg(arg=Neg(arg=t)):
            return t
        case Add(lhs=l, rhs=r) if _is_zero(r):
            return l
        case Add(lhs=l, rhs=r) if _is_zero(l):
            return r
        case Sub(lhs=l, rhs=r) if _is_zero(r):
            return l
        case Sub(lhs=l, rhs=r) if _is_zero(l):
            return Neg(r)
        case Mul(lhs=l, rhs=r) if _is_zero(l) or _is_zero(r):
            return _ZERO
        case Mul(lhs=l, rhs=r) if _is_one(r):
            return l
        case Mul(lhs=l, rhs=r) if _is_one(l):
            return r
        case Mul(lhs=l, rhs=r) if _rank(r) < _rank(l):
            return Mul(r, l)
        case Div(lhs=l, rhs=r) if _is_one(r):
            return l
        case IntPow(base=b, exponent=1):
            return b
        case IntPow(exponent=0):
            return _ONE
    return e


def _simplify_pass(e: Expr) -> Expr:
    match e:
        case Const() | Pi() | Var() | Param():
            return e
        case Neg(arg=a):
            return _rewrite(Neg(_simplify_pass(a)))
        case Sin(arg=a):
            return _rewrite(Sin(_simplify_pass(a)))
        case Cos(arg=a):
            return _rewrite(Cos(_simplify_pass(a)))
        case IntPow(base=b, exponent=k):
            return _rewrite(IntPow(_simplify_pass(b), k))
        case Add(lhs=l, rhs=r):
            return _rewrite(Add(_simplify_pass(l), _simplify_pass(r)))
        case Sub(lhs=l, rhs=r):
            return _rewrite(Sub(_simplify_pass(l), _simplify_pass(r)))
        case Mul(lhs=l, rhs=r):
            return _rewrite(Mul(_simplify_pass(l), _simplify_pass(r)))
        case Div(lhs=l, rhs=r):
            return _rewrite(Div(_simplify_pass(l), _simplify_pass(r)))
    raise TypeError(f"not an expression node: {e!r}")


def simplify(e: Expr) -> Expr:
    """Fixed point of a finite rule set: constant folding, t*0 -> 0,
    t*1 -> t, t+0 -> t, 0-t -> -t, t/1 -> t, t^1 -> t, t^0 -> 1, double
    negation, and moving atomic factors left in products (so that
    cos(n*x)*n becomes n*cos(n*x)).

    The result evaluates identically to the input everywhere both are
    defined; t*0 -> 0 may widen the domain.
    """
    for _ in range(64):
        nxt = _simplify_pass(e)
        if nxt == e:
            return e
        e = nxt
    return e


@dataclass(frozen=True)
class DerivativeCheckReport:
    """Outcome of a finite-difference derivative check.

    ``passed`` holds iff ``max_relative_deviation <= tolerance``.  The
    deviation denominator is max(|f(x)|, abs_floor/tol), which makes the
    test relative away from zeros of f with an absolute floor near them.
    """
    sample_count: int
    max_relative_deviation: float
    step_sizes: tuple[float, ...]
    passed: bool
    tolerance: float
    worst_x: float
    env: dict

    def to_json_obj(self) -> dict:
        return {
            "passed": self.passed,
            "max_relative_deviation": self.max_relative_deviation,
            "tolerance": self.tolerance,
            "samples": self.sample_count,
            "step_sizes": list(self.step_sizes),
            "worst_x": self.worst_x,
        }


def check_derivative(f: Expr, g: Expr, dom: Interval, env: ParamEnv | None = None,
                     tol: float = 1e-6, *, samples: int = 129,
                     step_sizes: tuple[float, ...] = (1e-4, 1e-5, 1e-6),
                     abs_floor: float = 1e-9) -> DerivativeCheckReport:
    """Check numerically that f is the derivative of g on ``dom``.

    Samples ``samples`` points x in the interior of dom; at each, compares
    f(x) with the central difference (g(x+h) - g(x-h))/(2h) over the
    decreasing step sweep, keeping the best step per point (this guards
    against both truncation and cancellation error).  Reports the max over
    samples of the min-over-steps relative deviation.
    """
    if tol <= 0:
        raise ArgumentError("tolerance must be positive")
    if samples < 1:
        raise ArgumentError("need at least one sample")
    env = {} if env is None else dict(env)
    h_max = max(step_sizes)
    if dom.width <= 2 * h_max:
        raise ArgumentError("domain too narrow for the finite-difference sweep")
    xs = np.linspace(dom.lo + h_max, dom.hi - h_max, samples)
    fx = eval_on_grid(f, xs, env)
    floor = abs_floor / tol
    denom = np.maximum(np.abs(fx), floor)
    best = np.full(xs.shape, math.inf)
    for h in step_sizes:
        gp = eval_on_grid(g, xs + h, env)
        gm = eval_on_grid(g, xs - h, env)
        dev = np.abs((gp - gm) / (2.0 * h) - fx) / denom
        best = np.minimum(best, dev)
    worst = int(np.argmax(best))
    max_dev = float(best[worst])
    return DerivativeCheckReport(
        sample_count=int(samples),
        max_relative_deviation=max_dev,
        step_sizes=tuple(step_sizes),
        passed=max_dev <= tol,
        tolerance=float(tol),
        worst_x=float(xs[worst]),
        env=env,
    )
