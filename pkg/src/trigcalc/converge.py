"""Convergence diagnostics for function sequences and partial sums.

Infinitely large indices have no runtime meaning here: every convergence
statement is probed at a finite ladder of indices N with decay criteria,
and reports carry the ladder so callers can tighten it.

 * uniform verdict: the sup (over a dense grid) of |S_N - limit| must
   decrease along the ladder (10% jitter allowed) to below a threshold.
 * pointwise verdict: every grid point's deviation must either end below a
   looser per-point threshold or show two orders of decay.  A uniform
   "yes" always forces a pointwise "yes" (uniform convergence implies
   pointwise convergence), so reports satisfy that implication by
   construction.
 * monotone verdict: the sequence values must be ordered consistently at
   every grid point across consecutive ladder rungs.
 * Dini diagnostic: on a closed bounded interval, a monotone sequence of
   continuous functions converging pointwise to a continuous limit must
   converge uniformly — when all four preconditions probe true but the
   uniform verdict is "no", the report is flagged inconsistent (a hard
   failure state, never silently dropped).  Fourier partial sums are
   typically not monotone, so the diagnostic reports that precondition
   as failed rather than claiming uniformity.
 * uniform-limit continuity: a uniform limit of continuous functions must
   be continuous; the analogous inconsistency flag applies.
 * overspill threshold: the executable shadow of a maximal-prefix
   argument — the largest k such that a predicate holds for all m <= k.
 * infinite sum rule: integral of partial sums vs partial sums of
   integrals, checked rung by rung with a cross-index stability ladder
   (the two sides may be truncated at independent indices).

The limit function may be supplied symbolically, as a constant, as a
callable, or omitted, in which case the reference is the sequence itself
at ten times the deepest ladder rung.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from .errors import ArgumentError, ContractError
from .expr import (
    Const, Expr, GridFn, Interval, ParamEnv, as_grid_fn, eval_expr,
    eval_on_grid, parse_expr,
)
from .ftc import continuity_probe
from .riemann import integrate_refine

__all__ = [
    "DEFAULT_NS", "FunctionSequence", "UniformReport", "MonotoneReport",
    "ConvergenceReport", "LimitContinuityReport", "InfiniteSumRuleReport",
    "partial_sum_eval", "uniform_report", "monotone_check", "dini_report",
    "limit_continuity_check", "overspill_threshold", "infinite_sum_rule_check",
    "sup_ladder_csv",
]

DEFAULT_NS = (4, 8, 16, 32, 64, 128, 256, 512, 1024)

LimitSpec = Union[Expr, float, int, GridFn, None]

_ZERO = Const(0.0)


@dataclass(frozen=True)
class FunctionSequence:
    """An indexed family of expressions n -> f_n.

    With ``partial_sums`` set, the sequence under test is S_N = sum of
    f_n for n = 0..N; otherwise it is f_N itself.  The generator must be
    total for 0 <= n <= n_max.
    """
    term: Callable[[int], Expr]
    partial_sums: bool = False
    n_max: int = 100_000

    @classmethod
    def from_template(cls, text: str, index: str = "n", *,
                      partial_sums: bool = False, start: int = 0,
                      n_max: int = 100_000) -> "FunctionSequence":
        """Build the family by substituting the index into a text template.

        Substitution is textual (token-aware), so templates like ``x^n``
        with the index in exponent position work.  Terms below ``start``
        are zero, which lets families defined from n = 1 (for instance
        sin(n*x)/n^2) avoid the singular n = 0 term.
        """
        pattern = re.compile(rf"\b{re.escape(index)}\b")
        cache: dict[int, Expr] = {}

        def term(n: int) -> Expr:
            if n < start:
                return _ZERO
            if n not in cache:
                cache[n] = parse_expr(pattern.sub(f"({n})", text))
            return cache[n]

        return cls(term, partial_sums, n_max)

    def _check_index(self, n: int) -> None:
        if n < 0 or n > self.n_max:
            raise ArgumentError(f"index {n} outside 0..{self.n_max}")


def partial_sum_eval(seq: FunctionSequence, N: int, x: float,
                     env: ParamEnv | None = None) -> float:
    """Sum of f_n(x) for n = 0..N, ascending order, compensated."""
    seq._check_index(N)
    return math.fsum(eval_expr(seq.term(n), x, env) for n in range(N + 1))


def _kahan_add(acc: np.ndarray, comp: np.ndarray, term: np.ndarray):
    y = term - comp
    t = acc + y
    comp = (t - acc) - y
    return t, comp


def _ladder_values(seq: FunctionSequence, Ns: tuple[int, ...], xs: np.ndarray,
                   env: ParamEnv | None) -> dict[int, np.ndarray]:
    """Sequence-under-test values S_N on the grid, one array per rung."""
    out: dict[int, np.ndarray] = {}
    if seq.partial_sums:
        wanted = set(Ns)
        acc = np.zeros(xs.shape)
        comp = np.zeros(xs.shape)
        for n in range(max(Ns) + 1):
            acc, comp = _kahan_add(acc, comp, eval_on_grid(seq.term(n), xs, env))
            if n in wanted:
                out[n] = acc.copy()
    else:
        for N in Ns:
            out[N] = eval_on_grid(seq.term(N), xs, env)
    return out


def _sum_fn(seq: FunctionSequence, N: int, env: ParamEnv | None) -> GridFn:
    def fn(xs: np.ndarray) -> np.ndarray:
        acc = np.zeros(xs.shape)
        comp = np.zeros(xs.shape)
        for n in range(N + 1):
            acc, comp = _kahan_add(acc, comp, eval_on_grid(seq.term(n), xs, env))
        return acc
    return fn


def _sequence_fn(seq: FunctionSequence, N: int, env: ParamEnv | None) -> GridFn:
    if seq.partial_sums:
        return _sum_fn(seq, N, env)
    return as_grid_fn(seq.term(N), env)


def _limit_fn(limit: LimitSpec, seq: FunctionSequence, max_n: int,
              env: ParamEnv | None) -> tuple[GridFn, str]:
    """Resolve the limit specification to a grid function plus a mode tag."""
    if limit is None:
        ref_n = min(10 * max_n, seq.n_max)
        return _sequence_fn(seq, ref_n, env), "reference"
    if isinstance(limit, Expr):
        return as_grid_fn(limit, env), "expr"
    if isinstance(limit, (int, float)):
        value = float(limit)
        return (lambda xs: np.full(np.asarray(xs).shape, value)), "constant"
    if callable(limit):
        return as_grid_fn(limit), "callable"
    raise ArgumentError(f"not a limit specification: {limit!r}")


def _validate_ladder(Ns, grid: int, seq: FunctionSequence) -> tuple[int, ...]:
    Ns = tuple(int(N) for N in Ns)
    if not Ns or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ArgumentError("Ns must be a nonempty ascending ladder")
    if grid < 257:
        raise ArgumentError("need a grid of at least 257 points")
    seq._check_index(Ns[-1])
    return Ns


@dataclass(frozen=True)
class UniformReport:
    """Sup-deviation ladder and the pointwise/uniform verdicts."""
    grid: tuple[float, ...]
    sup_ladder: tuple[tuple[int, float], ...]
    uniform: bool
    pointwise: bool
    decay_ratio: float
    threshold: float
    limit_mode: str
    worst_x: float

    def to_json_obj(self) -> dict:
        return {
            "uniform": self.uniform,
            "pointwise": self.pointwise,
            "sup_ladder": [[n, s] for n, s in self.sup_ladder],
            "decay_ratio": self.decay_ratio,
            "threshold": self.threshold,
            "limit_mode": self.limit_mode,
            "worst_x": self.worst_x,
            "grid_points": len(self.grid),
        }


def sup_ladder_csv(report: "UniformReport | ConvergenceReport") -> str:
    """CSV rendering (N, sup_dev) of the sup-deviation ladder."""
    fragment = report.uniform if isinstance(report, ConvergenceReport) else report
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "sup_dev"])
    for n, s in fragment.sup_ladder:
        writer.writerow([n, repr(s)])
    return buf.getvalue()


def uniform_report(seq: FunctionSequence, limit: LimitSpec, dom: Interval,
                   grid: int = 1025, Ns: tuple[int, ...] = DEFAULT_NS, *,
                   env: ParamEnv | None = None, threshold: float = 1e-3,
                   jitter: float = 0.10,
                   pointwise_threshold: float = 1e-2) -> UniformReport:
    """Sup over a dense grid of |S_N - limit| for each ladder rung.

    Uniform verdict "yes" iff the sup ladder decreases (within jitter) to
    below the threshold at the deepest rung.
    """
    Ns = _validate_ladder(Ns, grid, seq)
    if pointwise_threshold < threshold:
        raise ArgumentError("pointwise threshold must not be tighter than "
                            "the uniform threshold")
    xs = np.linspace(dom.lo, dom.hi, grid)
    values = _ladder_values(seq, Ns, xs, env)
    limit_fn, mode = _limit_fn(limit, seq, Ns[-1], env)
    limit_vals = limit_fn(xs)

    dev_first = np.abs(values[Ns[0]] - limit_vals)
    dev_last = np.abs(values[Ns[-1]] - limit_vals)
    sups = [(N, float(np.max(np.abs(values[N] - limit_vals)))) for N in Ns]

    sup_seq = [s for _, s in sups]
    decreasing = all(s2 <= s1 * (1.0 + jitter) for s1, s2 in zip(sup_seq, sup_seq[1:]))
    uniform = decreasing and sup_seq[-1] <= threshold

    decayed = dev_last <= np.maximum(pointwise_threshold, dev_first / 100.0)
    pointwise = bool(np.all(decayed)) or uniform

    if len(sup_seq) > 1 and sup_seq[0] > 0 and sup_seq[-1] > 0:
        ratio = (sup_seq[-1] / sup_seq[0]) ** (1.0 / (len(sup_seq) - 1))
    else:
        ratio = 0.0
    return UniformReport(
        grid=tuple(float(v) for v in xs),
        sup_ladder=tuple(sups),
        uniform=uniform,
        pointwise=pointwise,
        decay_ratio=float(ratio),
        threshold=float(threshold),
        limit_mode=mode,
        worst_x=float(xs[int(np.argmax(dev_last))]),
    )


@dataclass(frozen=True)
class MonotoneReport:
    """Grid-based ordering of the sequence along the ladder.

    Verdict "non-strict" means both orderings hold within slack (a
    constant sequence).  For "none", ``first_violation`` is the earliest
    (x, N) breaking the non-decreasing ordering.
    """
    verdict: str  # increasing | decreasing | non-strict | none
    first_violation: tuple[float, int] | None

    def to_json_obj(self) -> dict:
        return {"verdict": self.verdict,
                "first_violation": list(self.first_violation)
                if self.first_violation else None}


def monotone_check(seq: FunctionSequence, dom: Interval, grid: int = 1025,
                   Ns: tuple[int, ...] = DEFAULT_NS, *,
                   env: ParamEnv | None = None) -> MonotoneReport:
    """Check S_{N_{k+1}} >= S_{N_k} (or <=) at every grid point across all
    consecutive ladder rungs."""
    Ns = _validate_ladder(Ns, grid, seq)
    xs = np.linspace(dom.lo, dom.hi, grid)
    values = _ladder_values(seq, Ns, xs, env)
    scale = max(float(np.max(np.abs(values[N]))) for N in Ns)
    slack = 1e-12 * (1.0 + scale)

    inc_viol: tuple[float, int] | None = None
    dec_viol: tuple[float, int] | None = None
    for prev_n, next_n in zip(Ns, Ns[1:]):
        diff = values[next_n] - values[prev_n]
        if inc_viol is None:
            bad = np.nonzero(diff < -slack)[0]
            if bad.size:
                inc_viol = (float(xs[bad[0]]), next_n)
        if dec_viol is None:
            bad = np.nonzero(diff > slack)[0]
            if bad.size:
                dec_viol = (float(xs[bad[0]]), next_n)
        if inc_viol is not None and dec_viol is not None:
            break
    if inc_viol is None and dec_viol is None:
        return MonotoneReport("non-strict", None)
    if inc_viol is None:
        return MonotoneReport("increasing", None)
    if dec_viol is None:
        return MonotoneReport("decreasing", None)
    return MonotoneReport("none", inc_viol)


_PRECONDITION_NAMES = ("closed_bounded", "monotone", "pointwise",
                       "continuous_limit")


@dataclass(frozen=True)
class ConvergenceReport:
    """Aggregate report: sup ladder, verdicts, Dini diagnostic, and the
    uniform-limit continuity finding.

    ``dini_inconsistent`` (preconditions met but uniform verdict "no") and
    ``limit_consistency_violation`` (uniform limit of continuous terms
    probed discontinuous) are hard failure states.
    """
    uniform: UniformReport
    monotone: MonotoneReport
    preconditions: tuple[tuple[str, bool], ...]
    failed_preconditions: tuple[str, ...]
    dini_applicable: bool
    dini_confirmed: bool | None
    dini_inconsistent: bool
    limit_continuity: str  # continuous | discontinuous | not-applicable
    limit_consistency_violation: bool

    def __post_init__(self):
        # data invariant: a uniform "yes" is always also a pointwise "yes"
        if self.uniform.uniform and not self.uniform.pointwise:
            raise ArgumentError("report invariant violated: uniform without pointwise")

    def to_json_obj(self) -> dict:
        return {
            "uniform": self.uniform.to_json_obj(),
            "monotone": self.monotone.to_json_obj(),
            "dini": {
                "preconditions": {k: v for k, v in self.preconditions},
                "failed": list(self.failed_preconditions),
                "applicable": self.dini_applicable,
                "confirmed": self.dini_confirmed,
                "inconsistent": self.dini_inconsistent,
            },
            "limit_continuity": self.limit_continuity,
            "limit_consistency_violation": self.limit_consistency_violation,
        }


def _probe_fn_continuity(fn: GridFn, dom: Interval) -> bool:
    return continuity_probe(fn, dom, None, grid=256).continuous


def dini_report(seq: FunctionSequence, limit: LimitSpec, dom: Interval,
                grid: int = 1025, Ns: tuple[int, ...] = DEFAULT_NS, *,
                env: ParamEnv | None = None, threshold: float = 1e-3,
                jitter: float = 0.10,
                pointwise_threshold: float = 1e-2) -> ConvergenceReport:
    """Evaluate the four Dini preconditions (closed bounded interval,
    monotone sequence, pointwise convergence, continuous limit) and, when
    all hold, verify the guaranteed uniform convergence.

    A discrepancy — preconditions met but uniform verdict "no" — is
    reported through the distinguished ``dini_inconsistent`` state rather
    than raised.
    """
    fragment = uniform_report(seq, limit, dom, grid, Ns, env=env,
                              threshold=threshold, jitter=jitter,
                              pointwise_threshold=pointwise_threshold)
    mono = monotone_check(seq, dom, grid, Ns, env=env)
    limit_fn, _ = _limit_fn(limit, seq, Ns[-1], env)
    limit_continuous = _probe_fn_continuity(limit_fn, dom)

    flags = {
        "closed_bounded": True,  # Interval is closed and bounded by construction
        "monotone": mono.verdict != "none",
        "pointwise": fragment.pointwise,
        "continuous_limit": limit_continuous,
    }
    failed = tuple(name for name in _PRECONDITION_NAMES if not flags[name])
    applicable = not failed
    confirmed = fragment.uniform if applicable else None
    inconsistent = applicable and not fragment.uniform

    terms_continuous = all(
        _probe_fn_continuity(as_grid_fn(seq.term(k), env), dom)
        for k in {0, Ns[0], Ns[-1]})
    if fragment.uniform:
        limit_verdict = "continuous" if limit_continuous else "discontinuous"
    else:
        limit_verdict = "not-applicable"
    violation = (fragment.uniform and terms_continuous and not limit_continuous)

    return ConvergenceReport(
        uniform=fragment,
        monotone=mono,
        preconditions=tuple((name, flags[name]) for name in _PRECONDITION_NAMES),
        failed_preconditions=failed,
        dini_applicable=applicable,
        dini_confirmed=confirmed,
        dini_inconsistent=inconsistent,
        limit_continuity=limit_verdict,
        limit_consistency_violation=violation,
    )


@dataclass(frozen=True)
class LimitContinuityReport:
    """Continuity of the limit function, guarded by the uniform verdict.

    A uniform limit of continuous terms must probe continuous; the
    ``inconsistent`` flag is the hard failure state for that contract.
    """
    verdict: str  # continuous | discontinuous | not-applicable
    uniform: bool
    terms_continuous: bool
    inconsistent: bool


def limit_continuity_check(seq: FunctionSequence, limit: LimitSpec,
                           dom: Interval, grid: int = 1025,
                           Ns: tuple[int, ...] = DEFAULT_NS,
                           tol: float = 1e-9, *, env: ParamEnv | None = None,
                           uniform_result: UniformReport | None = None
                           ) -> LimitContinuityReport:
    """Probe limit continuity when (and only when) the sequence converges
    uniformly; otherwise the check is reported not-applicable."""
    if uniform_result is None:
        uniform_result = uniform_report(seq, limit, dom, grid, Ns, env=env)
    if not uniform_result.uniform:
        return LimitContinuityReport("not-applicable", False, False, False)
    limit_fn, _ = _limit_fn(limit, seq, Ns[-1], env)
    limit_continuous = continuity_probe(limit_fn, dom, None, grid=256,
                                        tol=tol).continuous
    terms_continuous = all(
        _probe_fn_continuity(as_grid_fn(seq.term(k), env), dom)
        for k in {0, Ns[0], Ns[-1]})
    verdict = "continuous" if limit_continuous else "discontinuous"
    inconsistent = terms_continuous and not limit_continuous
    return LimitContinuityReport(verdict, True, terms_continuous, inconsistent)


def overspill_threshold(predicate: Callable[[int, object], bool], context,
                        n_max: int) -> int | None:
    """Largest k <= n_max such that the predicate holds for every m <= k;
    None if it already fails at 0.

    This is the finite, executable shadow of a maximal-prefix argument:
    scanning the recursive "holds up to here" predicate instead of the raw
    one turns "holds for arbitrarily large indices" into "holds on a whole
    prefix".
    """
    if n_max < 0:
        raise ArgumentError("n_max must be >= 0")
    for m in range(n_max + 1):
        if not predicate(m, context):
            return m - 1 if m else None
    return n_max


@dataclass(frozen=True)
class InfiniteSumRuleReport:
    """Rung-by-rung comparison of A_N = integral of S_N with
    B_N = sum of per-term integrals, plus the cross-index stability ladder
    |A_{2N} - B_N| standing in for truncation at independent indices."""
    rungs: tuple[tuple[int, float, float, float], ...]  # (N, A_N, B_N, |A-B|)
    tolerance: float
    passed: bool
    cross_ladder: tuple[tuple[int, float], ...]
    cross_stable: bool
    inconclusive: bool

    @property
    def status(self) -> str:
        if self.inconclusive:
            return "inconclusive"
        return "pass" if self.passed else "fail"

    def to_json_obj(self) -> dict:
        return {
            "rungs": [[n, a, b, d] for n, a, b, d in self.rungs],
            "tolerance": self.tolerance,
            "status": self.status,
            "passed": self.passed,
            "cross_ladder": [[n, d] for n, d in self.cross_ladder],
            "cross_stable": self.cross_stable,
        }


def infinite_sum_rule_check(seq: FunctionSequence, dom: Interval,
                            env: ParamEnv | None = None,
                            Ns: tuple[int, ...] = DEFAULT_NS,
                            tol: float = 1e-6, *,
                            condition: "UniformReport | ConvergenceReport | None" = None,
                            condition_threshold: float = 1e-2,
                            n0: int = 16) -> InfiniteSumRuleReport:
    """Check the sum rule for the series at each ladder rung.

    Requires uniform convergence of the partial sums (verified via the
    supplied ``condition`` report, or probed against a deep reference
    partial sum when none is given); Dini-applicable reports also qualify.
    """
    Ns = _validate_ladder(Ns, 257, seq)
    ps = seq if seq.partial_sums else replace(seq, partial_sums=True)

    if condition is None:
        condition = uniform_report(ps, None, dom, 257, Ns, env=env,
                                   threshold=condition_threshold)
    if isinstance(condition, ConvergenceReport):
        ok = condition.uniform.uniform or condition.dini_applicable
    else:
        ok = condition.uniform
    if not ok:
        raise ContractError("sum rule for series requires uniform convergence "
                            "of the partial sums (or Dini preconditions)")

    max_n = Ns[-1]
    term_tol = tol / (4.0 * (max_n + 1))
    term_values: list[float] = []
    all_converged = True
    for n in range(max_n + 1):
        est = integrate_refine(as_grid_fn(ps.term(n), env), dom, None, term_tol, n0)
        term_values.append(est.value)
        all_converged = all_converged and est.converged

    rungs = []
    a_by_n: dict[int, float] = {}
    for N in Ns:
        a_est = integrate_refine(_sum_fn(ps, N, env), dom, None, tol / 4.0, n0)
        all_converged = all_converged and a_est.converged
        b_val = math.fsum(term_values[:N + 1])
        a_by_n[N] = a_est.value
        rungs.append((N, a_est.value, b_val, abs(a_est.value - b_val)))

    passed = all(d <= tol for _, _, _, d in rungs) and all_converged

    b_prefix = {N: math.fsum(term_values[:N + 1]) for N in Ns}
    cross = [(N, abs(a_by_n[2 * N] - b_prefix[N]))
             for N in Ns if 2 * N in a_by_n]
    deltas = [d for _, d in cross]
    cross_stable = all(d2 <= d1 * 1.10 for d1, d2 in zip(deltas[1:], deltas[2:])) \
        if len(deltas) > 2 else True

    return InfiniteSumRuleReport(tuple(rungs), float(tol), passed,
                                 tuple(cross), cross_stable,
                                 not all_converged)
