"""Trigonometric orthogonality, Fourier sums and coefficients, uniqueness,
and the finite sum rule for integration.

The orthogonality relations over a symmetric interval [-L, L] are

    sin(m pi x / L) * sin(n pi x / L):  0 if m != n or m = n = 0,  L if m = n != 0
    cos(m pi x / L) * cos(n pi x / L):  0 if m != n,  L if m = n != 0,  2L if m = n = 0
    sin(m pi x / L) * cos(n pi x / L):  0 always

These closed forms are returned exactly via case split; the degenerate
m = n case is never obtained by evaluating the (singular) m != n
antiderivative.  Numeric cross-checks of each case run refinement
quadrature over the product integrand.

A degree-N trigonometric polynomial with half-period L is

    a0 + sum_{n=1..N} (a_n cos(n pi x / L) + b_n sin(n pi x / L))

and its coefficients can be recovered from function values by

    a0  = 1/(2L) * integral of f over [-L, L]
    a_n = 1/L * integral of f(x) cos(n pi x / L)
    b_n = 1/L * integral of f(x) sin(n pi x / L)

which is also the basis for the uniqueness check: two trigonometric
polynomials agree as functions iff they agree coefficientwise.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .expr import (
    Add, Const, Cos, Div, Expr, Interval, Mul, PI, ParamEnv, Sin, X,
    as_grid_fn, eval_on_grid,
)
from .ftc import ftc1_probe
from .riemann import integrate_refine, integrate_signed

__all__ = [
    "KINDS", "FourierCoefficients", "TrigPoly", "CoefficientRun",
    "OrthogonalityCheck", "SumRuleReport",
    "orthogonality_integral", "orthogonality_case", "orthogonality_integrand",
    "orthogonality_numeric_check", "fourier_sum_eval", "coeffs_numeric",
    "uniqueness_check", "sum_rule_finite_check", "synth_expr",
]

KINDS = ("sin-sin", "cos-cos", "sin-cos")


def _validate_kind_args(kind: str, m: int, n: int, L: float) -> None:
    if kind not in KINDS:
        raise ArgumentError(f"kind must be one of {KINDS}")
    if m < 0 or n < 0:
        raise ArgumentError("harmonic indices must be >= 0")
    if L == 0:
        raise ArgumentError("half-period L must be nonzero")


def orthogonality_case(kind: str, m: int, n: int) -> str:
    """Which case of the orthogonality table applies."""
    if kind == "sin-cos":
        return "any m,n"
    if m != n:
        return "m≠n"
    return "m=n=0" if m == 0 else "m=n≠0"


def orthogonality_integral(kind: str, m: int, n: int, L: float) -> float:
    """Closed-form value of the orthogonality integral over [-L, L].

    Exact rational multiple of L (0, L, or 2L), computed by case split.
    """
    _validate_kind_args(kind, m, n, L)
    case = orthogonality_case(kind, m, n)
    if kind == "sin-sin":
        return float(L) if case == "m=n≠0" else 0.0
    if kind == "cos-cos":
        if case == "m=n≠0":
            return float(L)
        return 2.0 * L if case == "m=n=0" else 0.0
    return 0.0


def _harmonic(kind_half: str, k: int, L: float) -> Expr:
    angle = Mul(Const(k), Mul(Div(PI, Const(float(L))), X))
    return Sin(angle) if kind_half == "sin" else Cos(angle)


def orthogonality_integrand(kind: str, m: int, n: int, L: float) -> Expr:
    """The product integrand sin/cos(m pi x / L) * sin/cos(n pi x / L)."""
    _validate_kind_args(kind, m, n, L)
    left, right = kind.split("-")
    return Mul(_harmonic(left, m, L), _harmonic(right, n, L))


@dataclass(frozen=True)
class OrthogonalityCheck:
    closed_form: float
    quadrature: float
    delta: float
    status: str  # pass | fail | inconclusive
    case: str

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json_obj(self) -> dict:
        return {"value": self.closed_form, "case": self.case,
                "quadrature": self.quadrature, "delta": self.delta,
                "status": self.status}


def orthogonality_numeric_check(kind: str, m: int, n: int, L: float,
                                tol: float = 1e-6) -> OrthogonalityCheck:
    """Cross-check the closed form against refinement quadrature over
    [-L, L].  Non-converged quadrature yields status "inconclusive"."""
    if tol <= 0:
        raise ArgumentError("tolerance must be positive")
    closed = orthogonality_integral(kind, m, n, L)
    integrand = orthogonality_integrand(kind, m, n, L)
    est = integrate_signed(integrand, -L, L, None, tol / 4.0)
    delta = closed - est.value
    if not est.converged:
        status = "inconclusive"
    else:
        status = "pass" if abs(delta) <= tol else "fail"
    return OrthogonalityCheck(closed, est.value, delta, status,
                              orthogonality_case(kind, m, n))


@dataclass(frozen=True)
class FourierCoefficients:
    """Coefficient record (a0, a[1..N], b[1..N]) of a degree-N
    trigonometric polynomial with half-period L."""
    a0: float
    a: tuple[float, ...]
    b: tuple[float, ...]
    L: float
    N: int

    def __post_init__(self):
        if self.L == 0:
            raise ArgumentError("half-period L must be nonzero")
        if self.N < 0:
            raise ArgumentError("degree N must be >= 0")
        if len(self.a) != self.N or len(self.b) != self.N:
            raise ArgumentError("coefficient lists must have length N")

    def to_json_obj(self) -> dict:
        return {"L": self.L, "a0": self.a0, "a": list(self.a), "b": list(self.b)}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FourierCoefficients":
        a = tuple(float(v) for v in obj["a"])
        b = tuple(float(v) for v in obj["b"])
        return cls(float(obj["a0"]), a, b, float(obj["L"]), len(a))

    @classmethod
    def from_json(cls, text: str) -> "FourierCoefficients":
        return cls.from_json_obj(json.loads(text))

    def to_csv(self) -> str:
        """Rows (n, a_n, b_n); a0 appears as the n = 0 a-entry."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "a", "b"])
        writer.writerow([0, repr(self.a0), repr(0.0)])
        for i in range(self.N):
            writer.writerow([i + 1, repr(self.a[i]), repr(self.b[i])])
        return buf.getvalue()


def synth_expr(c: FourierCoefficients) -> Expr:
    """Expression tree of the trigonometric polynomial with coefficients c."""
    e: Expr = Const(c.a0)
    for i in range(c.N):
        k = i + 1
        angle = Mul(Const(k), Mul(Div(PI, Const(float(c.L))), X))
        e = Add(e, Add(Mul(Const(c.a[i]), Cos(angle)),
                       Mul(Const(c.b[i]), Sin(angle))))
    return e


@dataclass(frozen=True)
class TrigPoly:
    """A coefficient record together with its derived expression tree; the
    two evaluate identically."""
    coefficients: FourierCoefficients
    expr: Expr

    @classmethod
    def from_coefficients(cls, c: FourierCoefficients) -> "TrigPoly":
        return cls(c, synth_expr(c))


def fourier_sum_eval(c: FourierCoefficients, x):
    """Evaluate a0 + sum over n of (a_n cos + b_n sin) at x, in fixed
    ascending-n order with compensated accumulation.  Accepts a scalar or
    an array of x values."""
    if isinstance(x, np.ndarray):
        scale = math.pi / c.L
        total = np.full(x.shape, float(c.a0))
        comp = np.zeros(x.shape)
        for i in range(c.N):
            k = i + 1
            term = c.a[i] * np.cos(k * scale * x) + c.b[i] * np.sin(k * scale * x)
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
        return total
    terms = [float(c.a0)]
    scale = math.pi / c.L
    for i in range(c.N):
        k = i + 1
        terms.append(c.a[i] * math.cos(k * scale * x) + c.b[i] * math.sin(k * scale * x))
    return math.fsum(terms)


@dataclass(frozen=True)
class CoefficientRun:
    """Numeric coefficient recovery plus convergence bookkeeping.

    ``inconclusive`` names the coefficients whose component quadrature did
    not converge; empty means every integral converged.
    """
    coefficients: FourierCoefficients
    inconclusive: tuple[str, ...]

    @property
    def converged(self) -> bool:
        return not self.inconclusive


def coeffs_numeric(f: Expr, env: ParamEnv | None, L: float, N: int,
                   tol: float = 1e-6, *, n0: int = 16) -> CoefficientRun:
    """Recover Fourier coefficients of f by quadrature over [-L, L].

    Each component integral runs at per-coefficient tolerance tol/(2N+1)
    so the recovered record is within tol of the true one coefficientwise.
    """
    if L == 0:
        raise ArgumentError("half-period L must be nonzero")
    if N < 0:
        raise ArgumentError("degree N must be >= 0")
    if tol <= 0:
        raise ArgumentError("tolerance must be positive")
    coeff_tol = tol / (2 * N + 1)
    absL = abs(L)
    inconclusive: list[str] = []

    est = integrate_signed(f, -L, L, env, coeff_tol * 2 * absL, n0)
    if not est.converged:
        inconclusive.append("a0")
    a0 = est.value / (2.0 * L)

    a: list[float] = []
    b: list[float] = []
    for k in range(1, N + 1):
        angle = Mul(Const(k), Mul(Div(PI, Const(float(L))), X))
        for name, factor, acc in (("a", Cos(angle), a), ("b", Sin(angle), b)):
            est = integrate_signed(Mul(f, factor), -L, L, env,
                                   coeff_tol * absL, n0)
            if not est.converged:
                inconclusive.append(f"{name}{k}")
            acc.append(est.value / L)

    record = FourierCoefficients(a0, tuple(a), tuple(b), float(L), N)
    return CoefficientRun(record, tuple(inconclusive))


def uniqueness_check(c1: FourierCoefficients, c2: FourierCoefficients,
                     tol: float = 1e-9) -> bool:
    """Coefficientwise agreement within tol.  Holds iff the two
    trigonometric polynomials agree as functions."""
    if c1.L != c2.L or c1.N != c2.N:
        raise ArgumentError("coefficient records must share L and N")
    if abs(c1.a0 - c2.a0) > tol:
        return False
    return all(abs(p - q) <= tol for p, q in zip(c1.a + c1.b, c2.a + c2.b))


@dataclass(frozen=True)
class SumRuleReport:
    """Finite sum rule: integral of the sum vs sum of the integrals, plus
    an exercise of the proof structure (the accumulated antiderivatives
    G = sum of g_n must differentiate back to the summed integrand)."""
    lhs: float
    rhs: float
    delta: float
    per_term: tuple[float, ...]
    passed: bool
    status: str  # pass | fail | inconclusive
    ftc1_max_deviation: float
    ftc1_passed: bool

    def to_json_obj(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "delta": self.delta,
                "per_term": list(self.per_term), "status": self.status,
                "ftc1_max_deviation": self.ftc1_max_deviation,
                "ftc1_passed": self.ftc1_passed}


def sum_rule_finite_check(family: list[Expr] | tuple[Expr, ...], dom: Interval,
                          env: ParamEnv | None = None, tol: float = 1e-9, *,
                          ftc1_points: int = 5, ftc1_h: float = 1e-3,
                          ftc1_quad_tol: float = 1e-8) -> SumRuleReport:
    """Check integral(sum f_n) = sum(integral f_n) within tol*(N+1).

    The second leg rebuilds G(x) = sum of g_n(x) from per-term running
    integrals g_n(x) = integral of f_n over [lo, x] and checks G' against
    the summed integrand by central differences.
    """
    family = tuple(family)
    if not family:
        raise ArgumentError("need at least one function in the family")
    count = len(family)
    fns = [as_grid_fn(f, env) for f in family]

    def total(xs: np.ndarray) -> np.ndarray:
        acc = np.zeros(xs.shape)
        comp = np.zeros(xs.shape)
        for fn in fns:
            y = fn(xs) - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        return acc

    lhs_est = integrate_refine(total, dom, None, tol * count / 4.0)
    per = [integrate_refine(fn, dom, None, tol / 4.0) for fn in fns]
    rhs = math.fsum(e.value for e in per)
    delta = lhs_est.value - rhs
    inconclusive = (not lhs_est.converged) or any(not e.converged for e in per)
    passed = abs(delta) <= tol * count and not inconclusive

    # FTC-1 leg: G(x) = sum of per-term running integrals; central
    # differences of G must reproduce the summed integrand.
    xs = np.linspace(dom.lo, dom.hi, ftc1_points + 2)[1:-1]
    worst = 0.0
    for x in xs:
        gp = math.fsum(integrate_signed(fn, dom.lo, float(x) + ftc1_h, None,
                                        ftc1_quad_tol).value for fn in fns)
        gm = math.fsum(integrate_signed(fn, dom.lo, float(x) - ftc1_h, None,
                                        ftc1_quad_tol).value for fn in fns)
        target = float(total(np.array([x]))[0])
        worst = max(worst, abs((gp - gm) / (2.0 * ftc1_h) - target))
    ftc1_tol = 1e-3 * (1 + count)
    ftc1_ok = worst <= ftc1_tol

    status = "inconclusive" if inconclusive else ("pass" if passed and ftc1_ok
                                                  else "fail")
    return SumRuleReport(lhs_est.value, rhs, delta, tuple(e.value for e in per),
                         passed and ftc1_ok, status, worst, ftc1_ok)
