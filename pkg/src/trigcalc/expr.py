"""Expression trees for real-valued functions of one variable.

An expression is a finite immutable tree over

    Const | Pi | Var | Param(name) | Neg | Add | Sub | Mul | Div
    | IntPow(base, integer exponent) | Sin | Cos

There is exactly one distinguished variable, spelled ``x`` in the text
syntax; every other identifier is a free parameter that must be bound in a
:data:`ParamEnv` at evaluation time.  ``pi`` is a dedicated node, not a
parameter, so that closed-form cancellations like sin(k*pi) = 0 can be
recognised symbolically by callers.

Literal numbers are stored as exact :class:`fractions.Fraction` values when
they are written as integer or decimal literals; evaluation converts to
binary64.  Only sin/cos/arithmetic/integer powers are supported: the scope
is trigonometric polynomials and their algebra.

All node types are frozen dataclasses: values are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Union

import numpy as np

from .errors import ArgumentError, DomainError, ParseError, UnboundParameterError

__all__ = [
    "Expr", "Const", "Pi", "Var", "Param", "Neg", "Add", "Sub", "Mul", "Div",
    "IntPow", "Sin", "Cos", "Interval", "ParamEnv",
    "X", "PI", "sin", "cos", "param", "num",
    "parse_expr", "to_text", "eval_expr", "eval_on_grid", "free_params",
    "substitute", "fold_constants",
]

#: Evaluation environment: parameter name -> real value.
ParamEnv = Mapping[str, float]

NumberLike = Union[int, float, Fraction]


def _coerce(value) -> "Expr":
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(Fraction(value))
    if isinstance(value, float):
        return Const(value)
    raise TypeError(f"cannot use {type(value).__name__} as an expression")


@dataclass(frozen=True)
class Expr:
    """Base node.  Subclasses carry the payload; this class only provides
    operator sugar for building trees in code."""

    def __add__(self, other):
        return Add(self, _coerce(other))

    def __radd__(self, other):
        return Add(_coerce(other), self)

    def __sub__(self, other):
        return Sub(self, _coerce(other))

    def __rsub__(self, other):
        return Sub(_coerce(other), self)

    def __mul__(self, other):
        return Mul(self, _coerce(other))

    def __rmul__(self, other):
        return Mul(_coerce(other), self)

    def __truediv__(self, other):
        return Div(self, _coerce(other))

    def __rtruediv__(self, other):
        return Div(_coerce(other), self)

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or isinstance(exponent, bool):
            raise TypeError("exponent must be a literal integer")
        return IntPow(self, exponent)

    def __neg__(self):
        return Neg(self)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    """Numeric literal; exact Fraction for parsed literals, float allowed
    for programmatically built trees."""
    value: Fraction | float


@dataclass(frozen=True)
class Pi(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    """The integration/differentiation variable.  There is only one, named x."""
    name: str = "x"


@dataclass(frozen=True)
class Param(Expr):
    """A free parameter (any identifier other than x and pi)."""
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Sub(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Mul(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Div(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class IntPow(Expr):
    """Integer power.  The exponent is a literal Python int, never symbolic."""
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or isinstance(self.exponent, bool):
            raise ArgumentError("IntPow exponent must be a literal integer")


@dataclass(frozen=True)
class Sin(Expr):
    arg: Expr


@dataclass(frozen=True)
class Cos(Expr):
    arg: Expr


X = Var()
PI = Pi()


def sin(e) -> Sin:
    return Sin(_coerce(e))


def cos(e) -> Cos:
    return Cos(_coerce(e))


def param(name: str) -> Param:
    return Param(name)


def num(value: NumberLike) -> Const:
    """Const from a number; ints and Fractions stay exact."""
    return _coerce(value)  # type: ignore[return-value]


@dataclass(frozen=True)
class Interval:
    """Finite closed interval [lo, hi] with lo <= hi."""
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ArgumentError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ArgumentError(f"interval requires lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

_FUNCTIONS = {"sin": Sin, "cos": Cos}

_ATOM_EXPECTED = ("number", "identifier", "'pi'", "'sin'", "'cos'", "'('", "'-'")


class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind      # num | ident | op | lparen | rparen | end
        self.text = text
        self.offset = offset  # 0-based byte offset into the UTF-8 input


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, offset = 0, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            offset += len(ch.encode("utf-8"))
            continue
        start = offset
        if ch.isascii() and ch.isdigit():
            j = i
            while j < n and text[j].isascii() and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                if j >= n or not (text[j].isascii() and text[j].isdigit()):
                    raise ParseError("expected digit after decimal point",
                                     start + (j - i), ("digit",))
                while j < n and text[j].isascii() and text[j].isdigit():
                    j += 1
            lexeme = text[i:j]
            tokens.append(_Token("num", lexeme, start))
            offset += j - i  # digits and '.' are single-byte
            i = j
            continue
        if (ch.isascii() and ch.isalpha()) or ch == "_":
            j = i
            while j < n and ((text[j].isascii() and text[j].isalnum())
                             or text[j] == "_"):
                j += 1
            lexeme = text[i:j]
            tokens.append(_Token("ident", lexeme, start))
            offset += len(lexeme)  # ASCII identifiers are single-byte
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, start))
        elif ch == "(":
            tokens.append(_Token("lparen", ch, start))
        elif ch == ")":
            tokens.append(_Token("rparen", ch, start))
        else:
            raise ParseError(f"unexpected character {ch!r}", start, _ATOM_EXPECTED)
        i += 1
        offset += len(ch.encode("utf-8"))
    tokens.append(_Token("end", "", offset))
    return tokens


class _Parser:
    """Recursive-descent parser for infix +,-,*,/,^ with sin/cos and pi.

    Precedence (loosest first): +,- then *,/ then unary - then ^.
    ^ is right-associative in principle, but its exponent must be an
    integer literal, so chains like a^b^c are rejected.
    """

    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> _Token:
        return self._tokens[self._pos]

    def _advance(self) -> _Token:
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def _expect(self, kind: str, text: str, expected: tuple[str, ...]) -> _Token:
        tok = self._peek()
        if tok.kind != kind or (text and tok.text != text):
            raise ParseError(f"unexpected {tok.text!r}" if tok.kind != "end"
                             else "unexpected end of input", tok.offset, expected)
        return self._advance()

    def parse(self) -> Expr:
        e = self._sum()
        tok = self._peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected {tok.text!r}", tok.offset,
                             ("'+'", "'-'", "'*'", "'/'", "end of input"))
        return e

    def _sum(self) -> Expr:
        e = self._term()
        while self._peek().kind == "op" and self._peek().text in "+-":
            op = self._advance().text
            rhs = self._term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def _term(self) -> Expr:
        e = self._unary()
        while self._peek().kind == "op" and self._peek().text in "*/":
            op = self._advance().text
            rhs = self._unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def _unary(self) -> Expr:
        tok = self._peek()
        if tok.kind == "op" and tok.text == "-":
            self._advance()
            inner = self._unary()
            # fold "-3" into a negative literal so printing round-trips
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Neg(inner)
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        tok = self._peek()
        if tok.kind == "op" and tok.text == "^":
            self._advance()
            return IntPow(base, self._exponent())
        return base

    def _exponent(self) -> int:
        tok = self._peek()
        if tok.kind == "lparen":
            self._advance()
            k = self._exponent()
            self._expect("rparen", ")", ("')'",))
            return k
        sign = 1
        if tok.kind == "op" and tok.text == "-":
            self._advance()
            sign = -1
            tok = self._peek()
        if tok.kind != "num" or "." in tok.text:
            raise ParseError("exponent must be an integer literal", tok.offset,
                             ("integer",))
        self._advance()
        return sign * int(tok.text)

    def _atom(self) -> Expr:
        tok = self._peek()
        if tok.kind == "num":
            self._advance()
            return Const(Fraction(tok.text))
        if tok.kind == "ident":
            self._advance()
            name = tok.text
            if self._peek().kind == "lparen":
                if name not in _FUNCTIONS:
                    raise ParseError(f"unsupported function name {name!r}",
                                     tok.offset, ("'sin'", "'cos'"))
                self._advance()
                arg = self._sum()
                self._expect("rparen", ")", ("')'",))
                return _FUNCTIONS[name](arg)
            if name == "pi":
                return PI
            if name == "x":
                return X
            return Param(name)
        if tok.kind == "lparen":
            self._advance()
            e = self._sum()
            self._expect("rparen", ")", ("')'",))
            return e
        raise ParseError(f"unexpected {tok.text!r}" if tok.kind != "end"
                         else "unexpected end of input", tok.offset, _ATOM_EXPECTED)


def parse_expr(text: str) -> Expr:
    """Parse the text grammar into an expression tree.

    Raises :class:`ParseError` (with byte offset and expected-token set) on
    malformed input.
    """
    return _Parser(_tokenize(text)).parse()


# --------------------------------------------------------------------------
# Printing
# --------------------------------------------------------------------------

def _format_number(value: Fraction | float) -> str:
    frac = value if isinstance(value, Fraction) else Fraction(value)
    num_, den = frac.numerator, frac.denominator
    if den == 1:
        return str(num_)
    # exact finite decimal exists iff den = 2^a * 5^b
    a = b = 0
    rest = den
    while rest % 2 == 0:
        rest //= 2
        a += 1
    while rest % 5 == 0:
        rest //= 5
        b += 1
    if rest == 1:
        digits = max(a, b)
        scaled = num_ * 10 ** digits // den
        sign = "-" if scaled < 0 else ""
        text = str(abs(scaled)).rjust(digits + 1, "0")
        return f"{sign}{text[:-digits]}.{text[-digits:]}"
    return f"({num_}/{den})"


def to_text(e: Expr) -> str:
    """Canonical printer: fully parenthesized infix.

    ``parse_expr(to_text(e))`` equals ``e`` after :func:`fold_constants`
    normalization on both sides (general rationals print as quotients).
    """
    match e:
        case Const(value=v):
            return _format_number(v)
        case Pi():
            return "pi"
        case Var(name=name):
            return name
        case Param(name=name):
            return name
        case Neg(arg=a):
            return f"(-{to_text(a)})"
        case Add(lhs=l, rhs=r):
            return f"({to_text(l)} + {to_text(r)})"
        case Sub(lhs=l, rhs=r):
            return f"({to_text(l)} - {to_text(r)})"
        case Mul(lhs=l, rhs=r):
            return f"({to_text(l)} * {to_text(r)})"
        case Div(lhs=l, rhs=r):
            return f"({to_text(l)} / {to_text(r)})"
        case IntPow(base=b, exponent=k):
            base_text = to_text(b)
            if base_text.startswith("-"):
                base_text = f"({base_text})"  # (-1)^0 is not -(1^0)
            return f"({base_text}^{k})"
        case Sin(arg=a):
            return f"sin({to_text(a)})"
        case Cos(arg=a):
            return f"cos({to_text(a)})"
    raise TypeError(f"not an expression node: {e!r}")


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

def _eval(e: Expr, x, env: ParamEnv):
    match e:
        case Const(value=v):
            return float(v)
        case Pi():
            return math.pi
        case Var():
            return x
        case Param(name=name):
            try:
                return env[name]
            except KeyError:
                raise UnboundParameterError(name) from None
        case Neg(arg=a):
            return -_eval(a, x, env)
        case Add(lhs=l, rhs=r):
            return _eval(l, x, env) + _eval(r, x, env)
        case Sub(lhs=l, rhs=r):
            return _eval(l, x, env) - _eval(r, x, env)
        case Mul(lhs=l, rhs=r):
            return _eval(l, x, env) * _eval(r, x, env)
        case Div(lhs=l, rhs=r):
            den = _eval(r, x, env)
            if np.any(den == 0.0):
                raise DomainError(f"division by zero in {to_text(e)}", subtree=e)
            return _eval(l, x, env) / den
        case IntPow(base=b, exponent=k):
            base = _eval(b, x, env)
            if k < 0 and np.any(base == 0.0):
                raise DomainError(f"zero base with negative exponent in {to_text(e)}",
                                  subtree=e)
            return base ** k
        case Sin(arg=a):
            return np.sin(_eval(a, x, env))
        case Cos(arg=a):
            return np.cos(_eval(a, x, env))
    raise TypeError(f"not an expression node: {e!r}")


def eval_expr(e: Expr, x: float, env: ParamEnv | None = None) -> float:
    """IEEE-double evaluation of ``e`` at (x, env).

    Deterministic for fixed inputs.  Division by zero raises
    :class:`DomainError` carrying the offending subtree; a parameter with
    no binding raises :class:`UnboundParameterError`.
    """
    out = _eval(e, float(x), {} if env is None else env)
    return float(out)


def eval_on_grid(e: Expr, xs, env: ParamEnv | None = None) -> np.ndarray:
    """Vectorized evaluation over an array of x values.

    Same semantics as :func:`eval_expr` pointwise; the result always has
    the shape of ``xs`` (constants broadcast).
    """
    xs = np.asarray(xs, dtype=float)
    out = np.asarray(_eval(e, xs, {} if env is None else env), dtype=float)
    if out.shape != xs.shape:
        out = np.broadcast_to(out, xs.shape)
    return out


GridFn = Callable[[np.ndarray], np.ndarray]


def as_grid_fn(f: "Expr | GridFn", env: ParamEnv | None = None) -> GridFn:
    """Adapter turning an expression (plus env) or a plain callable into a
    vectorized grid function."""
    if isinstance(f, Expr):
        return lambda xs: eval_on_grid(f, xs, env)
    if callable(f):
        fn = f

        def wrapped(xs: np.ndarray) -> np.ndarray:
            xs = np.asarray(xs, dtype=float)
            try:
                out = np.asarray(fn(xs), dtype=float)
                if out.shape != xs.shape:
                    raise ValueError
            except (TypeError, ValueError):
                out = np.array([float(fn(float(v))) for v in xs.ravel()])
                out = out.reshape(xs.shape)
            return out

        return wrapped
    raise ArgumentError(f"not an integrand: {f!r}")


# --------------------------------------------------------------------------
# Structure
# --------------------------------------------------------------------------

def free_params(e: Expr) -> frozenset[str]:
    """The exact set of parameter names appearing in ``e`` (never 'x')."""
    match e:
        case Const() | Pi() | Var():
            return frozenset()
        case Param(name=name):
            return frozenset((name,))
        case Neg(arg=a) | Sin(arg=a) | Cos(arg=a):
            return free_params(a)
        case IntPow(base=b):
            return free_params(b)
        case Add(lhs=l, rhs=r) | Sub(lhs=l, rhs=r) | Mul(lhs=l, rhs=r) | Div(lhs=l, rhs=r):
            return free_params(l) | free_params(r)
    raise TypeError(f"not an expression node: {e!r}")


def substitute(e: Expr, bindings: Mapping[str, "Expr | NumberLike"]) -> Expr:
    """Replace parameters by expressions or numbers, structurally."""
    match e:
        case Const() | Pi() | Var():
            return e
        case Param(name=name):
            if name in bindings:
                return _coerce(bindings[name])
            return e
        case Neg(arg=a):
            return Neg(substitute(a, bindings))
        case Sin(arg=a):
            return Sin(substitute(a, bindings))
        case Cos(arg=a):
            return Cos(substitute(a, bindings))
        case IntPow(base=b, exponent=k):
            return IntPow(substitute(b, bindings), k)
        case Add(lhs=l, rhs=r):
            return Add(substitute(l, bindings), substitute(r, bindings))
        case Sub(lhs=l, rhs=r):
            return Sub(substitute(l, bindings), substitute(r, bindings))
        case Mul(lhs=l, rhs=r):
            return Mul(substitute(l, bindings), substitute(r, bindings))
        case Div(lhs=l, rhs=r):
            return Div(substitute(l, bindings), substitute(r, bindings))
    raise TypeError(f"not an expression node: {e!r}")


def _fold_node(e: Expr) -> Expr:
    """Fold one node whose children are already folded.  Exact on
    Fractions; mixed Fraction/float folds to float.  Nodes that would fail
    at evaluation time (0 denominator, 0^negative) are left unfolded."""
    match e:
        case Neg(arg=Const(value=v)):
            return Const(-v)
        case Add(lhs=Const(value=a), rhs=Const(value=b)):
            return Const(a + b)
        case Sub(lhs=Const(value=a), rhs=Const(value=b)):
            return Const(a - b)
        case Mul(lhs=Const(value=a), rhs=Const(value=b)):
            return Const(a * b)
        case Div(lhs=Const(value=a), rhs=Const(value=b)) if b != 0:
            if isinstance(a, Fraction) and isinstance(b, Fraction):
                return Const(a / b)
            return Const(float(a) / float(b))
        case IntPow(base=Const(value=v), exponent=k) if k >= 0 or v != 0:
            return Const(v ** k)
    return e


def fold_constants(e: Expr) -> Expr:
    """Normalization: fold all arithmetic over literal constants, bottom-up.

    This is the normal form under which parse/print round-trips are exact.
    """
    match e:
        case Const() | Pi() | Var() | Param():
            return e
        case Neg(arg=a):
            return _fold_node(Neg(fold_constants(a)))
        case Sin(arg=a):
            return Sin(fold_constants(a))
        case Cos(arg=a):
            return Cos(fold_constants(a))
        case IntPow(base=b, exponent=k):
            return _fold_node(IntPow(fold_constants(b), k))
        case Add(lhs=l, rhs=r):
            return _fold_node(Add(fold_constants(l), fold_constants(r)))
        case Sub(lhs=l, rhs=r):
            return _fold_node(Sub(fold_constants(l), fold_constants(r)))
        case Mul(lhs=l, rhs=r):
            return _fold_node(Mul(fold_constants(l), fold_constants(r)))
        case Div(lhs=l, rhs=r):
            return _fold_node(Div(fold_constants(l), fold_constants(r)))
    raise TypeError(f"not an expression node: {e!r}")
