"""Command-line front end.

Subcommands expose the library with machine-readable output:

    diff EXPR
    checkderiv F G --domain a,b [--params k=v ...]
    integrate EXPR --domain a,b [--ftc NAME]
    orthog KIND m n L [--check]
    fourier coeffs EXPR --L v --N n
    fourier synth COEFFS.json --at x
    fourier unique C1.json C2.json
    converge {uniform|dini|sumrule} TEMPLATE --index n --domain a,b --Ns ...

Exit codes partition outcomes: 0 pass/success, 1 mathematical failure
(a check ran and said no), 2 usage or parse error, 3 non-convergence or
inconclusive.  Results go to stdout (written once, at the end);
diagnostics go to stderr.  Identical invocations produce byte-identical
output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace

from .converge import (
    DEFAULT_NS, FunctionSequence, dini_report, infinite_sum_rule_check,
    sup_ladder_csv, uniform_report,
)
from .errors import CalcError, ConfigurationError, EvalError, ParseError
from .expr import Interval, fold_constants, parse_expr, to_text
from .fourier import (
    FourierCoefficients, coeffs_numeric, fourier_sum_eval, orthogonality_case,
    orthogonality_integral, orthogonality_numeric_check, uniqueness_check,
)
from .ftc import Registry, builtin_registry, ftc2_evaluate
from .riemann import integrate_signed
from .symdiff import check_derivative, differentiate, simplify

__all__ = ["Config", "run", "main"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3

_FORMATS = ("json", "csv", "text")

CONFIG_ENV_VAR = "TRIGCALC_CONFIG"


@dataclass(frozen=True)
class Config:
    """Runtime defaults, overridable per flag."""
    tolerance: float = 1e-6
    grid: int = 1025
    refinement_cap: int = 24
    format: str = "text"
    registry: str | None = None

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ConfigurationError("tolerance must be positive")
        if self.grid < 16:
            raise ConfigurationError("grid must be at least 16")
        if self.format not in _FORMATS:
            raise ConfigurationError(f"format must be one of {_FORMATS}")

    @classmethod
    def load(cls, path: str) -> "Config":
        values: dict = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigurationError(f"{path}:{lineno}: expected key=value")
                key, value = (part.strip() for part in line.split("=", 1))
                if key == "tolerance":
                    values[key] = float(value)
                elif key in ("grid", "refinement_cap"):
                    values[key] = int(value)
                elif key in ("format", "registry"):
                    values[key] = value
                else:
                    raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
        return cls(**values)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    # global flags live on a shared parent so they are accepted after the
    # subcommand, e.g. `orthog sin-sin 3 3 3.14 --format json`
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=_FORMATS, default=None)
    common.add_argument("--config", default=None, help="config file (key=value)")

    parser = _Parser(prog="trigcalc", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diff", parents=[common],
                       help="differentiate an expression")
    p.add_argument("expr")

    p = sub.add_parser("checkderiv", parents=[common],
                       help="check that F is the derivative of G")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--domain", required=True)
    p.add_argument("--params", nargs="*", default=[])
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("integrate", parents=[common],
                       help="definite integral by refinement quadrature, "
                            "or via a registered antiderivative")
    p.add_argument("expr")
    p.add_argument("--domain", required=True)
    p.add_argument("--ftc", default=None, help="registered entry name")
    p.add_argument("--registry", default=None, help="registry JSON file")
    p.add_argument("--params", nargs="*", default=[])
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("orthog", parents=[common],
                       help="orthogonality integral closed form")
    p.add_argument("kind", choices=("sin-sin", "cos-cos", "sin-cos"))
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("L", type=float)
    p.add_argument("--check", action="store_true",
                   help="cross-check against quadrature")
    p.add_argument("--tol", type=float, default=None)

    fourier = sub.add_parser("fourier", help="Fourier coefficient tools")
    fsub = fourier.add_subparsers(dest="fourier_command", required=True)

    p = fsub.add_parser("coeffs", parents=[common],
                        help="coefficients by quadrature")
    p.add_argument("expr")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--params", nargs="*", default=[])
    p.add_argument("--tol", type=float, default=None)

    p = fsub.add_parser("synth", parents=[common],
                        help="evaluate a coefficient file at a point")
    p.add_argument("coeffs")
    p.add_argument("--at", type=float, required=True)

    p = fsub.add_parser("unique", parents=[common],
                        help="coefficientwise equality of two files")
    p.add_argument("c1")
    p.add_argument("c2")
    p.add_argument("--tol", type=float, default=None)

    conv = sub.add_parser("converge", help="convergence diagnostics")
    csub = conv.add_subparsers(dest="converge_command", required=True)
    for name in ("uniform", "dini", "sumrule"):
        p = csub.add_parser(name, parents=[common])
        p.add_argument("template", help="term template, e.g. 'sin(n*x)/n^2'")
        p.add_argument("--index", default="n")
        p.add_argument("--domain", required=True)
        p.add_argument("--Ns", default=None, help="comma-separated ladder")
        p.add_argument("--grid", type=int, default=None)
        p.add_argument("--start", type=int, default=0,
                       help="terms below this index are zero")
        p.add_argument("--partial-sums", action="store_true",
                       help="diagnose the partial sums rather than the terms")
        if name != "sumrule":
            p.add_argument("--limit", default=None,
                           help="limit expression (default: deep reference "
                                "partial sum)")
            p.add_argument("--limit-value", type=float, default=None)
            p.add_argument("--threshold", type=float, default=None)
        else:
            p.add_argument("--tol", type=float, default=None)
    return parser


def _parse_domain(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise _UsageError(f"domain must be 'a,b', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise _UsageError(f"domain endpoints must be numbers, got {text!r}") from None


def _parse_params(pairs: list[str]) -> dict:
    env = {}
    for pair in pairs:
        if "=" not in pair:
            raise _UsageError(f"parameter binding must be name=value, got {pair!r}")
        name, value = pair.split("=", 1)
        try:
            env[name.strip()] = float(value)
        except ValueError:
            raise _UsageError(f"parameter value must be a number in {pair!r}") from None
    return env


def _parse_ns(text: str | None) -> tuple[int, ...]:
    if text is None:
        return DEFAULT_NS
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise _UsageError(f"Ns must be comma-separated integers, got {text!r}") from None


def _load_registry(path: str | None) -> Registry:
    return Registry.load(path) if path else builtin_registry()


@dataclass
class _Output:
    payload: dict
    text: str
    csv: str | None
    code: int


def _cmd_diff(args, config: Config) -> _Output:
    e = parse_expr(args.expr)
    raw = differentiate(e)
    tidy = simplify(raw)
    payload = {"input": to_text(e), "derivative": to_text(raw),
               "simplified": to_text(tidy)}
    text = f"d/dx {to_text(e)} = {to_text(tidy)}\n  (raw: {to_text(raw)})\n"
    return _Output(payload, text, None, EXIT_OK)


def _cmd_checkderiv(args, config: Config) -> _Output:
    f = parse_expr(args.f)
    g = parse_expr(args.g)
    a, b = _parse_domain(args.domain)
    tol = args.tol if args.tol is not None else config.tolerance
    report = check_derivative(f, g, Interval(min(a, b), max(a, b)),
                              _parse_params(args.params), tol)
    payload = report.to_json_obj()
    verdict = "pass" if report.passed else "fail"
    text = (f"derivative check: {verdict}\n"
            f"max relative deviation {report.max_relative_deviation:.3e} "
            f"(tol {tol:.3e}) over {report.sample_count} samples\n")
    return _Output(payload, text, None, EXIT_OK if report.passed else EXIT_FAIL)


def _cmd_integrate(args, config: Config) -> _Output:
    e = parse_expr(args.expr)
    a, b = _parse_domain(args.domain)
    env = _parse_params(args.params)
    tol = args.tol if args.tol is not None else config.tolerance
    if args.ftc:
        registry = _load_registry(args.registry or config.registry)
        entry = registry.get(args.ftc)
        if fold_constants(e) != fold_constants(entry.f):
            raise _UsageError(
                f"expression does not match entry {args.ftc!r} "
                f"(expected {to_text(entry.f)})")
        report = ftc2_evaluate(entry, a, b, env)
        payload = report.to_json_obj()
        if report.value is None or not report.step_riemann_converged:
            code = EXIT_INCONCLUSIVE
        else:
            bound = max(1e-8, 1e-6 * abs(report.value))
            code = EXIT_OK if abs(report.cross_check_delta) <= bound else EXIT_FAIL
        text = (f"value = {report.value!r}\n"
                f"cross-check delta = {report.cross_check_delta!r} "
                f"({report.confidence})\n")
        return _Output(payload, text, None, code)
    est = integrate_signed(e, a, b, env, tol, max_doublings=config.refinement_cap)
    payload = est.to_json_obj()
    text = (f"value = {est.value!r}\n"
            f"converged = {est.converged} after {est.levels_used} refinements "
            f"(last delta {est.last_delta!r})\n")
    return _Output(payload, text, None,
                   EXIT_OK if est.converged else EXIT_INCONCLUSIVE)


def _cmd_orthog(args, config: Config) -> _Output:
    value = orthogonality_integral(args.kind, args.m, args.n, args.L)
    case = orthogonality_case(args.kind, args.m, args.n)
    if not args.check:
        payload = {"value": value, "case": case}
        text = f"closed form = {value!r}   [{case}]\n"
        return _Output(payload, text, None, EXIT_OK)
    tol = args.tol if args.tol is not None else config.tolerance
    check = orthogonality_numeric_check(args.kind, args.m, args.n, args.L, tol)
    payload = check.to_json_obj()
    text = (f"closed form = {value!r}   [{case}]\n"
            f"quadrature  = {check.quadrature!r}  ({check.status})\n")
    code = {"pass": EXIT_OK, "fail": EXIT_FAIL}.get(check.status, EXIT_INCONCLUSIVE)
    return _Output(payload, text, None, code)


def _cmd_fourier(args, config: Config) -> _Output:
    if args.fourier_command == "coeffs":
        e = parse_expr(args.expr)
        tol = args.tol if args.tol is not None else config.tolerance
        run_result = coeffs_numeric(e, _parse_params(args.params),
                                    args.L, args.N, tol)
        record = run_result.coefficients
        payload = record.to_json_obj()
        text = record.to_csv()
        code = EXIT_OK if run_result.converged else EXIT_INCONCLUSIVE
        return _Output(payload, text, record.to_csv(), code)
    if args.fourier_command == "synth":
        with open(args.coeffs, "r", encoding="utf-8") as fh:
            record = FourierCoefficients.from_json(fh.read())
        value = fourier_sum_eval(record, args.at)
        payload = {"x": args.at, "value": value}
        return _Output(payload, f"f({args.at!r}) = {value!r}\n", None, EXIT_OK)
    # unique
    records = []
    for path in (args.c1, args.c2):
        with open(path, "r", encoding="utf-8") as fh:
            records.append(FourierCoefficients.from_json(fh.read()))
    tol = args.tol if args.tol is not None else config.tolerance
    equal = uniqueness_check(records[0], records[1], tol)
    deltas = [abs(records[0].a0 - records[1].a0)]
    deltas += [abs(p - q) for p, q in zip(records[0].a + records[0].b,
                                          records[1].a + records[1].b)]
    payload = {"equal": equal, "max_delta": max(deltas), "tolerance": tol}
    text = f"{'equal' if equal else 'different'} (max delta {max(deltas)!r})\n"
    return _Output(payload, text, None, EXIT_OK if equal else EXIT_FAIL)


def _cmd_converge(args, config: Config) -> _Output:
    a, b = _parse_domain(args.domain)
    dom = Interval(min(a, b), max(a, b))
    Ns = _parse_ns(args.Ns)
    grid = args.grid if args.grid is not None else config.grid
    seq = FunctionSequence.from_template(args.template, args.index,
                                         partial_sums=args.partial_sums,
                                         start=args.start)
    if args.converge_command == "sumrule":
        tol = args.tol if args.tol is not None else config.tolerance
        report = infinite_sum_rule_check(seq, dom, None, Ns, tol)
        payload = report.to_json_obj()
        text = f"sum rule: {report.status}\n"
        for n, a_val, b_val, d in report.rungs:
            text += f"  N={n}: lhs={a_val!r} rhs={b_val!r} |delta|={d!r}\n"
        code = {"pass": EXIT_OK, "fail": EXIT_FAIL}.get(report.status,
                                                        EXIT_INCONCLUSIVE)
        csv_text = "N,lhs,rhs,delta\n" + "".join(
            f"{n},{a_val!r},{b_val!r},{d!r}\n" for n, a_val, b_val, d in report.rungs)
        return _Output(payload, text, csv_text, code)

    limit = None
    if getattr(args, "limit", None) is not None:
        limit = parse_expr(args.limit)
    elif getattr(args, "limit_value", None) is not None:
        limit = args.limit_value
    kwargs = {}
    if getattr(args, "threshold", None) is not None:
        kwargs["threshold"] = args.threshold

    if args.converge_command == "uniform":
        report = uniform_report(seq, limit, dom, grid, Ns, **kwargs)
        payload = report.to_json_obj()
        text = (f"uniform: {'yes' if report.uniform else 'no'}   "
                f"pointwise: {'yes' if report.pointwise else 'no'}\n")
        for n, s in report.sup_ladder:
            text += f"  N={n}: sup deviation {s!r}\n"
        return _Output(payload, text, sup_ladder_csv(report),
                       EXIT_OK if report.uniform else EXIT_FAIL)

    report = dini_report(seq, limit, dom, grid, Ns, **kwargs)
    payload = report.to_json_obj()
    failed = ", ".join(report.failed_preconditions) or "none"
    text = (f"dini preconditions failed: {failed}\n"
            f"applicable: {report.dini_applicable}  "
            f"confirmed: {report.dini_confirmed}  "
            f"inconsistent: {report.dini_inconsistent}\n")
    bad = report.dini_inconsistent or report.limit_consistency_violation
    return _Output(payload, text, sup_ladder_csv(report),
                   EXIT_FAIL if bad else EXIT_OK)


_DISPATCH = {
    "diff": _cmd_diff,
    "checkderiv": _cmd_checkderiv,
    "integrate": _cmd_integrate,
    "orthog": _cmd_orthog,
    "fourier": _cmd_fourier,
    "converge": _cmd_converge,
}


def run(argv: list[str], stdout=None, stderr=None) -> int:
    """Parse argv, run one subcommand, write the result once, and return
    the exit code."""
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        err.write(f"trigcalc: error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        config = Config.load(args.config) if args.config else (
            Config.load(os.environ[CONFIG_ENV_VAR])
            if os.environ.get(CONFIG_ENV_VAR) else Config())
        if args.format:
            config = replace(config, format=args.format)
        result = _DISPATCH[args.command](args, config)
    except _UsageError as exc:
        err.write(f"trigcalc: error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        err.write(f"trigcalc: parse error: {exc}\n")
        return EXIT_USAGE
    except (EvalError, CalcError) as exc:
        err.write(f"trigcalc: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        err.write(f"trigcalc: error: {exc}\n")
        return EXIT_USAGE

    if config.format == "json":
        out.write(json.dumps(result.payload, ensure_ascii=False) + "\n")
    elif config.format == "csv":
        if result.csv is None:
            err.write("trigcalc: error: this command has no CSV form\n")
            return EXIT_USAGE
        out.write(result.csv)
    else:
        out.write(result.text)
    return result.code


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
