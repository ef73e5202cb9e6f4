"""Finite-partition Riemann sums and refinement-based definite integration.

The integral of a continuous function is realized as the limit of midpoint
Riemann sums under grid doubling; refinement stops when two successive sums
agree to the requested tolerance.  Every estimate carries a boundedness
certificate (m, M): grid estimates of min/max f on the interval, so that
m*(b-a) <= sum <= M*(b-a) can be audited.  The certificate is an estimate,
not a rigorous enclosure.

Summation is compensated (exact via math.fsum) in a fixed order, so results
are reproducible run to run.

Integrands may be expression trees (evaluated under a parameter
environment) or plain vectorized callables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, EvalError
from .expr import Expr, GridFn, Interval, ParamEnv, as_grid_fn, eval_expr

__all__ = [
    "Partition", "IntegralEstimate", "make_partition", "riemann_sum",
    "integrate_refine", "integrate_signed", "extreme_bounds",
]

#: Total grid size past which a non-converged refinement gives up rather
#: than exhausting memory.
_MAX_POINTS = 1 << 23

_RULES = ("left", "midpoint", "right")


@dataclass(frozen=True)
class Partition:
    """Strictly increasing grid x_0 < ... < x_n with tags t_i in
    [x_{i-1}, x_i]."""
    points: tuple[float, ...]
    tags: tuple[float, ...]

    def __post_init__(self):
        pts, tags = self.points, self.tags
        if len(pts) < 2:
            raise ArgumentError("partition needs at least one subinterval")
        if len(tags) != len(pts) - 1:
            raise ArgumentError("need exactly one tag per subinterval")
        for a, b in zip(pts, pts[1:]):
            if not a < b:
                raise ArgumentError("partition points must be strictly increasing")
        for i, t in enumerate(tags):
            if not (pts[i] <= t <= pts[i + 1]):
                raise ArgumentError(f"tag {t} outside subinterval {i}")

    @property
    def n(self) -> int:
        return len(self.points) - 1


def make_partition(dom: Interval, n: int, rule: str = "midpoint") -> Partition:
    """Uniform partition of ``dom`` into n subintervals with tags at the
    left endpoint, midpoint, or right endpoint of each cell."""
    if n < 1:
        raise ArgumentError("need at least one subinterval")
    if not dom.lo < dom.hi:
        raise ArgumentError("degenerate interval")
    if rule not in _RULES:
        raise ArgumentError(f"rule must be one of {_RULES}")
    pts = np.linspace(dom.lo, dom.hi, n + 1)
    h = (dom.hi - dom.lo) / n
    if rule == "left":
        tags = pts[:-1]
    elif rule == "right":
        tags = pts[1:]
    else:
        tags = pts[:-1] + 0.5 * h
    return Partition(tuple(float(p) for p in pts), tuple(float(t) for t in tags))


def riemann_sum(f: Expr | GridFn, p: Partition, env: ParamEnv | None = None) -> float:
    """Sum of f(t_i) * (x_i - x_{i-1}) in left-to-right order, compensated.

    Evaluation errors are re-raised with the offending subinterval index.
    """
    tags = np.asarray(p.tags)
    try:
        vals = as_grid_fn(f, env)(tags)
    except EvalError:
        # locate the subinterval for the error report
        if isinstance(f, Expr):
            for i, t in enumerate(p.tags):
                try:
                    eval_expr(f, t, env)
                except EvalError as exc:
                    raise type(exc)(f"{exc} (subinterval {i}, tag {t})") from exc
        raise
    widths = np.diff(np.asarray(p.points))
    return math.fsum((vals * widths).tolist())


@dataclass(frozen=True)
class IntegralEstimate:
    """Refined midpoint-rule estimate of a definite integral.

    ``converged`` implies |last_delta| <= the requested tolerance.  The
    ``bounds`` pair (m, M) is a widened grid estimate of min/max f over the
    integration interval: m*(b-a) <= value <= M*(b-a) up to tolerance
    slack.  It is an estimate, not a certificate of enclosure.
    """
    value: float
    levels_used: int
    last_delta: float
    converged: bool
    bounds: tuple[float, float]
    n_final: int

    def to_json_obj(self) -> dict:
        return {
            "value": self.value,
            "converged": self.converged,
            "levels": self.levels_used,
            "last_delta": self.last_delta,
            "bounds": list(self.bounds),
            "n_final": self.n_final,
        }


def _midpoint_sum(fn: GridFn, lo: float, hi: float, n: int) -> float:
    h = (hi - lo) / n
    mids = lo + (np.arange(n) + 0.5) * h
    vals = fn(mids)
    return math.fsum(vals.tolist()) * h


def extreme_bounds(f: Expr | GridFn, dom: Interval, env: ParamEnv | None = None,
                   grid: int = 1025) -> tuple[float, float]:
    """Grid estimate (m, M) of min/max f over ``dom``, widened by a small
    safety factor.  Guarantees m <= f <= M only up to grid resolution."""
    if grid < 2:
        raise ArgumentError("need at least two grid points")
    xs = np.linspace(dom.lo, dom.hi, grid)
    vals = as_grid_fn(f, env)(xs)
    m = float(np.min(vals))
    big = float(np.max(vals))
    return (m - 1e-9 * (1.0 + abs(m)), big + 1e-9 * (1.0 + abs(big)))


def integrate_refine(f: Expr | GridFn, dom: Interval, env: ParamEnv | None = None,
                     tol: float = 1e-9, n0: int = 16, *,
                     max_doublings: int = 24) -> IntegralEstimate:
    """Refine midpoint sums at n0, 2*n0, 4*n0, ... subintervals until two
    successive sums differ by at most ``tol``, or the level cap runs out
    (which yields a non-converged estimate, not an exception).
    """
    if tol <= 0:
        raise ArgumentError("tolerance must be positive")
    if n0 < 1:
        raise ArgumentError("need at least one starting subinterval")
    if dom.lo == dom.hi:
        v = float(as_grid_fn(f, env)(np.array([dom.lo]))[0])
        return IntegralEstimate(0.0, 0, 0.0, True,
                                (v - 1e-9 * (1 + abs(v)), v + 1e-9 * (1 + abs(v))), 0)
    fn = as_grid_fn(f, env)
    bounds = extreme_bounds(fn, dom, None)
    n = n0
    prev = _midpoint_sum(fn, dom.lo, dom.hi, n)
    levels = 0
    delta = math.inf
    converged = False
    for level in range(1, max_doublings + 1):
        n *= 2
        if n > _MAX_POINTS:
            break
        cur = _midpoint_sum(fn, dom.lo, dom.hi, n)
        delta = cur - prev
        prev = cur
        levels = level
        if abs(delta) <= tol:
            converged = True
            break
    return IntegralEstimate(prev, levels, float(delta), converged, bounds, n)


def integrate_signed(f: Expr | GridFn, a: float, b: float,
                     env: ParamEnv | None = None, tol: float = 1e-9,
                     n0: int = 16, *, max_doublings: int = 24) -> IntegralEstimate:
    """Signed convention: integral from a to b is the negation of the
    integral from b to a; zero when a == b."""
    if a <= b:
        return integrate_refine(f, Interval(a, b), env, tol, n0,
                                max_doublings=max_doublings)
    est = integrate_refine(f, Interval(b, a), env, tol, n0,
                           max_doublings=max_doublings)
    return IntegralEstimate(-est.value, est.levels_used, est.last_delta,
                            est.converged, est.bounds, est.n_final)
