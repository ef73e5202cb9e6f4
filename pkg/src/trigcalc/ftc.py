"""Antiderivative-based evaluation of definite integrals.

The evaluation procedure runs five steps for an integrand f with declared
antiderivative g on a domain:

  1. probe that f returns finite real values on the interval,
  2. probe that f is continuous there (adjacent-sample jumps must shrink
     under grid doubling; probed, never proved),
  3. use the stored derivative verification of the (f, g) pair,
  4. run refinement quadrature on f as an independent formalization of the
     integral,
  5. evaluate g(b) - g(a) and report the cross-check delta against step 4.

Free arguments of f and g are plain parameter-environment bindings; entries
declare per-parameter constraints so that registration can sample
constraint-satisfying environments for the derivative check.

The registry is append-only behind a single writer lock; entries and
evaluations are immutable and freely shared.
"""

from __future__ import annotations

import json
import math
import threading
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random

import numpy as np

from .errors import (
    ArgumentError, ConfigurationError, ConstraintError, ContractError,
)
from .expr import (
    Add, Const, Cos, Div, Expr, GridFn, IntPow, Interval, Mul, Neg, PI, Param,
    ParamEnv, Sin, Sub, X, as_grid_fn, eval_expr, eval_on_grid, free_params,
    parse_expr, to_text,
)
from .riemann import IntegralEstimate, integrate_signed
from .symdiff import check_derivative

__all__ = [
    "ParamConstraint", "AntiderivativeEntry", "FtcReport", "ContinuityReport",
    "Registry", "register_antiderivative", "ftc2_evaluate", "continuity_probe",
    "ftc1_probe", "builtin_registry",
]


@dataclass(frozen=True)
class ParamConstraint:
    """Constraint on one free argument: type flag plus a sampling range.

    ``nonzero`` excludes values in (-1e-6, 1e-6) (exactly 0 for integers).
    """
    name: str
    integer: bool = False
    lo: float = -2.0
    hi: float = 2.0
    nonzero: bool = False

    def describe(self) -> str:
        kind = "integer" if self.integer else "real"
        text = f"{kind} in [{self.lo}, {self.hi}]"
        if self.nonzero:
            text += ", nonzero"
        return text

    def satisfied_by(self, value: float) -> bool:
        if self.integer and value != int(value):
            return False
        if not self.lo <= value <= self.hi:
            return False
        if self.nonzero and (value == 0 or (not self.integer and abs(value) < 1e-6)):
            return False
        return True

    def sample(self, rng: Random) -> float:
        if self.integer:
            lo, hi = math.ceil(self.lo), math.floor(self.hi)
            if lo > hi:
                raise ConfigurationError(f"empty integer range for {self.name!r}")
        for _ in range(64):
            v = float(rng.randint(lo, hi)) if self.integer else rng.uniform(self.lo, self.hi)
            if self.satisfied_by(v):
                return v
        raise ConfigurationError(f"cannot sample a value satisfying {self.describe()} "
                                 f"for {self.name!r}")

    def to_json_obj(self) -> dict:
        return {"name": self.name, "integer": self.integer, "lo": self.lo,
                "hi": self.hi, "nonzero": self.nonzero,
                "description": self.describe()}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ParamConstraint":
        return cls(obj["name"], obj["integer"], obj["lo"], obj["hi"], obj["nonzero"])


@dataclass(frozen=True)
class AntiderivativeEntry:
    """A verified (f, g) pair: g is an antiderivative of f on ``domain``
    for every parameter environment satisfying the constraints.

    ``verified`` means the finite-difference derivative check passed on all
    sampled environments; unverified entries are kept but cannot be used to
    evaluate integrals.
    """
    name: str
    f: Expr
    g: Expr
    domain: Interval
    constraints: tuple[ParamConstraint, ...] = ()
    distinct_params: tuple[str, ...] = ()
    verified: bool = False
    envs_tested: int = 0
    max_deviation: float = math.inf
    check_tolerance: float = 1e-6

    def constraint_for(self, name: str) -> ParamConstraint | None:
        for c in self.constraints:
            if c.name == name:
                return c
        return None

    def check_env(self, env: ParamEnv) -> None:
        """Raise ConstraintError unless ``env`` satisfies the constraints."""
        for c in self.constraints:
            if c.name not in env:
                raise ConstraintError(f"missing binding for {c.name!r}")
            if not c.satisfied_by(float(env[c.name])):
                raise ConstraintError(
                    f"{c.name}={env[c.name]} violates {c.describe()}")
        if self.distinct_params:
            seen = [float(env[p]) for p in self.distinct_params if p in env]
            if len(seen) != len(set(seen)):
                raise ConstraintError(
                    "parameters " + ", ".join(self.distinct_params)
                    + " must be pairwise distinct")

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "f": to_text(self.f),
            "g": to_text(self.g),
            "domain": {"lo": self.domain.lo, "hi": self.domain.hi},
            "constraints": [c.to_json_obj() for c in self.constraints],
            "distinct_params": list(self.distinct_params),
            "verified": self.verified,
            "envs_tested": self.envs_tested,
            "max_deviation": self.max_deviation,
            "check_tolerance": self.check_tolerance,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AntiderivativeEntry":
        return cls(
            name=obj["name"],
            f=parse_expr(obj["f"]),
            g=parse_expr(obj["g"]),
            domain=Interval(obj["domain"]["lo"], obj["domain"]["hi"]),
            constraints=tuple(ParamConstraint.from_json_obj(c)
                              for c in obj["constraints"]),
            distinct_params=tuple(obj.get("distinct_params", ())),
            verified=obj["verified"],
            envs_tested=obj["envs_tested"],
            max_deviation=obj["max_deviation"],
            check_tolerance=obj["check_tolerance"],
        )


def _sample_env(constraints: tuple[ParamConstraint, ...], names: frozenset[str],
                distinct: tuple[str, ...], rng: Random) -> dict:
    by_name = {c.name: c for c in constraints}
    default = ParamConstraint("_", lo=-2.0, hi=2.0)
    for _ in range(64):
        env = {}
        for name in sorted(names):
            c = by_name.get(name, default)
            env[name] = c.sample(rng)
        values = [env[p] for p in distinct if p in env]
        if len(values) == len(set(values)):
            return env
    raise ConfigurationError("cannot sample a distinct-parameter environment")


def register_antiderivative(name: str, f: Expr, g: Expr, domain: Interval,
                            constraints: tuple[ParamConstraint, ...] = (), *,
                            distinct_params: tuple[str, ...] = (),
                            samples: int = 16, tol: float = 1e-6,
                            registry: "Registry | None" = None) -> AntiderivativeEntry:
    """Verify that g is an antiderivative of f and build the entry.

    Runs the finite-difference derivative check over sampled
    constraint-satisfying environments (one check suffices when the pair
    has no free arguments).  The entry is returned, flagged unverified if
    any check failed, and appended to ``registry`` when given.
    """
    names = free_params(f) | free_params(g)
    constraint_names = {c.name for c in constraints}
    if not free_params(f) <= (free_params(g) | constraint_names):
        raise ArgumentError(
            "every free argument of f must appear in g or in a constraint")
    rng = Random(zlib.crc32(name.encode("utf-8")))
    n_envs = max(1, samples) if names else 1
    verified = True
    worst = 0.0
    for _ in range(n_envs):
        env = _sample_env(constraints, names, distinct_params, rng)
        report = check_derivative(f, g, domain, env, tol)
        worst = max(worst, report.max_relative_deviation)
        if not report.passed:
            verified = False
    entry = AntiderivativeEntry(
        name=name, f=f, g=g, domain=domain, constraints=tuple(constraints),
        distinct_params=tuple(distinct_params), verified=verified,
        envs_tested=n_envs, max_deviation=worst, check_tolerance=tol)
    if registry is not None:
        registry.add(entry)
    return entry


class Registry:
    """Append-only collection of antiderivative entries.

    Writes are serialized behind a lock; reads need no coordination since
    entries are immutable.
    """

    def __init__(self):
        self._entries: dict[str, AntiderivativeEntry] = {}
        self._lock = threading.Lock()

    def add(self, entry: AntiderivativeEntry) -> None:
        with self._lock:
            if entry.name in self._entries:
                raise ArgumentError(f"entry {entry.name!r} already registered")
            self._entries[entry.name] = entry

    def get(self, name: str) -> AntiderivativeEntry:
        try:
            return self._entries[name]
        except KeyError:
            raise ArgumentError(f"no entry named {name!r}") from None

    def names(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def __iter__(self):
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def save(self, path: str) -> None:
        obj = {"entries": [e.to_json_obj() for e in self]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Registry":
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        reg = cls()
        for entry_obj in obj["entries"]:
            reg.add(AntiderivativeEntry.from_json_obj(entry_obj))
        return reg


@dataclass(frozen=True)
class ContinuityReport:
    """Heuristic continuity probe: adjacent-sample jumps must roughly halve
    under each of two grid doublings (factor 1.5 slack)."""
    continuous: bool
    worst_jump: float
    jumps: tuple[float, float, float]


def continuity_probe(f: Expr | GridFn, dom: Interval, env: ParamEnv | None = None,
                     grid: int = 128, tol: float = 1e-9) -> ContinuityReport:
    """Probe continuity of f on ``dom``.  Heuristic stand-in for a proof:
    discontinuities keep the max adjacent jump from decaying."""
    if grid < 16:
        raise ArgumentError("need at least 16 grid intervals")
    fn = as_grid_fn(f, env)
    jumps = []
    for g in (grid, 2 * grid, 4 * grid):
        vals = fn(np.linspace(dom.lo, dom.hi, g + 1))
        diffs = np.abs(np.diff(vals))
        jumps.append(float(diffs.max()) if diffs.size else 0.0)
    j1, j2, j3 = jumps
    ok = j2 <= max(0.75 * j1, tol) and j3 <= max(0.75 * j2, tol)
    return ContinuityReport(ok, j3, (j1, j2, j3))


@dataclass(frozen=True)
class FtcReport:
    """Audit trail of the five-step evaluation.

    ``value`` is present only if steps 1-3 passed.  ``confidence`` is
    "cross-checked" when the quadrature converged and agreed, otherwise
    "downgraded".
    """
    step_real: bool
    step_continuous: bool
    step_antiderivative: bool
    step_riemann_converged: bool
    step_evaluated: bool
    value: float | None
    cross_check_delta: float | None
    quadrature: float | None
    confidence: str
    worst_jump: float

    def to_json_obj(self) -> dict:
        return {
            "steps": {
                "real_valued": self.step_real,
                "continuous": self.step_continuous,
                "antiderivative": self.step_antiderivative,
                "riemann_converged": self.step_riemann_converged,
                "evaluated": self.step_evaluated,
            },
            "value": self.value,
            "quadrature": self.quadrature,
            "cross_check_delta": self.cross_check_delta,
            "confidence": self.confidence,
        }


def ftc2_evaluate(entry: AntiderivativeEntry, a: float, b: float,
                  env: ParamEnv | None = None, *,
                  quad_tol: float | None = None) -> FtcReport:
    """Evaluate the integral of entry.f from a to b as g(b) - g(a), with a
    mandatory quadrature cross-check.

    The quadrature tolerance defaults to max(1e-9, 1e-7 * |value|), an
    order of magnitude tighter than the documented cross-check contract
    |delta| <= max(1e-8, 1e-6 * |value|).
    """
    if not entry.verified:
        raise ContractError(f"entry {entry.name!r} is not verified")
    if not (entry.domain.contains(a) and entry.domain.contains(b)):
        raise ArgumentError("integration endpoints outside the entry domain")
    env = {} if env is None else dict(env)
    entry.check_env(env)

    value = eval_expr(entry.g, b, env) - eval_expr(entry.g, a, env)
    lo, hi = min(a, b), max(a, b)
    span = Interval(lo, hi)

    probe_vals = eval_on_grid(entry.f, np.linspace(lo, hi, 257), env)
    step_real = bool(np.all(np.isfinite(probe_vals)))
    cont = continuity_probe(entry.f, span, env) if step_real else \
        ContinuityReport(False, math.inf, (math.inf,) * 3)
    step_continuous = cont.continuous

    if not (step_real and step_continuous):
        return FtcReport(step_real, step_continuous, entry.verified,
                         False, False, None, None, None, "downgraded",
                         cont.worst_jump)

    if quad_tol is None:
        quad_tol = max(1e-9, 1e-7 * abs(value))
    quad: IntegralEstimate = integrate_signed(entry.f, a, b, env, quad_tol)
    delta = value - quad.value
    confidence = "cross-checked" if quad.converged else "downgraded"
    return FtcReport(step_real, step_continuous, entry.verified,
                     quad.converged, True, value, delta, quad.value,
                     confidence, cont.worst_jump)


@dataclass(frozen=True)
class Ftc1Report:
    """Central differences of G(x) = integral of f from the interval's left
    endpoint to x, compared against f at interior sample points."""
    max_abs_deviation: float
    points: int
    step: float


def ftc1_probe(f: Expr | GridFn, dom: Interval, env: ParamEnv | None = None, *,
               points: int = 33, h: float = 1e-3,
               quad_tol: float = 1e-9) -> Ftc1Report:
    """Check that x -> integral of f over [lo, x] differentiates back to f."""
    xs = np.linspace(dom.lo, dom.hi, points + 2)[1:-1]
    fn = as_grid_fn(f, env)
    worst = 0.0
    for x in xs:
        gp = integrate_signed(fn, dom.lo, float(x) + h, None, quad_tol).value
        gm = integrate_signed(fn, dom.lo, float(x) - h, None, quad_tol).value
        dev = abs((gp - gm) / (2.0 * h) - float(fn(np.array([x]))[0]))
        worst = max(worst, dev)
    return Ftc1Report(worst, int(points), h)


# --------------------------------------------------------------------------
# Built-in entries
# --------------------------------------------------------------------------

def _frac(p: int, q: int = 1) -> Const:
    return Const(Fraction(p, q))


def _xpow(k: int) -> Expr:
    return X if k == 1 else IntPow(X, k)


def _poly_pair(k: int) -> tuple[Expr, Expr]:
    # f = x^k, g = x^(k+1)/(k+1)
    f: Expr = _frac(1) if k == 0 else _xpow(k)
    return f, Div(_xpow(k + 1), _frac(k + 1))


_BUILTIN_LOCK = threading.Lock()
_BUILTIN: Registry | None = None


def builtin_registry() -> Registry:
    """Registry of standard verified pairs (trigonometric and polynomial
    families, with and without free arguments).  Built once, lazily."""
    global _BUILTIN
    with _BUILTIN_LOCK:
        if _BUILTIN is not None:
            return _BUILTIN
        reg = Registry()
        sym_dom = Interval(-math.pi, math.pi)
        wide = Interval(-3.0, 3.0)
        n = Param("n")
        m = Param("m")
        L = Param("L")
        c = Param("c")
        nx = Mul(n, X)
        int_nonzero = ParamConstraint("n", integer=True, lo=-6, hi=6, nonzero=True)

        def reg_add(name, f, g, dom, cons=(), distinct=()):
            register_antiderivative(name, f, g, dom, cons,
                                    distinct_params=distinct, registry=reg)

        reg_add("zero", _frac(0), _frac(7), wide)
        reg_add("const_slope", c, Mul(c, X), wide,
                (ParamConstraint("c", lo=-2, hi=2),))
        for k in range(6):
            f, g = _poly_pair(k)
            reg_add(f"power_{k}", f, g, wide)
        reg_add("sin_x", Sin(X), Neg(Cos(X)), sym_dom)
        reg_add("cos_x", Cos(X), Sin(X), sym_dom)
        reg_add("freq_sine", Mul(n, Cos(nx)), Sin(nx), sym_dom, (int_nonzero,))
        reg_add("freq_cosine", Neg(Mul(n, Sin(nx))), Cos(nx), sym_dom, (int_nonzero,))
        reg_add("scaled_sine", Mul(c, Cos(X)), Mul(c, Sin(X)), sym_dom,
                (ParamConstraint("c", lo=-3, hi=3),))
        reg_add("x_sin_x", Add(Sin(X), Mul(X, Cos(X))), Mul(X, Sin(X)), sym_dom)
        reg_add("x_cos_x", Sub(Cos(X), Mul(X, Sin(X))), Mul(X, Cos(X)), sym_dom)
        reg_add("sin_squared", Mul(_frac(2), Mul(Sin(X), Cos(X))),
                IntPow(Sin(X), 2), sym_dom)
        reg_add("cos_squared", Neg(Mul(_frac(2), Mul(Sin(X), Cos(X)))),
                IntPow(Cos(X), 2), sym_dom)
        reg_add("poly_mix",
                Add(Mul(_frac(3), IntPow(X, 2)), Add(Mul(_frac(2), X), _frac(1))),
                Add(IntPow(X, 3), Add(IntPow(X, 2), X)), wide)
        reg_add("half_angle", Div(Cos(Div(X, _frac(2))), _frac(2)),
                Sin(Div(X, _frac(2))), sym_dom)

        # product of two sine harmonics and its closed-form antiderivative,
        # valid whenever m != n (and m + n != 0): the antiderivative divides
        # by (m - n) pi / L and (m + n) pi / L.
        diff_freq = Mul(Sub(m, n), Div(PI, L))
        sum_freq = Mul(Add(m, n), Div(PI, L))
        f_ss = Mul(Sin(Mul(m, Mul(Div(PI, L), X))), Sin(Mul(n, Mul(Div(PI, L), X))))
        g_ss = Mul(Div(_frac(1), _frac(2)),
                   Sub(Div(Sin(Mul(diff_freq, X)), diff_freq),
                       Div(Sin(Mul(sum_freq, X)), sum_freq)))
        reg_add("sin_sin_product", f_ss, g_ss, Interval(-8.0, 8.0),
                (ParamConstraint("m", integer=True, lo=1, hi=6),
                 ParamConstraint("n", integer=True, lo=1, hi=6),
                 ParamConstraint("L", lo=1.0, hi=3.0, nonzero=True)),
                distinct=("m", "n"))
        _BUILTIN = reg
        return reg
