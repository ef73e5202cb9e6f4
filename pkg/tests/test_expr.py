import math
from fractions import Fraction

import pytest
from hypothesis import given

from trigcalc import (
    Add, ArgumentError, Const, Cos, Div, DomainError, Interval, Mul, Param,
    ParseError, PI, Sin, UnboundParameterError, Var, X, eval_expr,
    eval_on_grid, fold_constants, free_params, num, parse_expr, substitute,
    to_text,
)
from conftest import smooth_exprs


class TestParse:
    def test_structural_translation(self):
        e = parse_expr("sin(n*pi*x/L)")
        assert e == Sin(Div(Mul(Mul(Param("n"), PI), X), Param("L")))

    def test_identity_case(self):
        assert parse_expr("x") == X

    def test_unclosed_call_offset(self):
        with pytest.raises(ParseError) as exc:
            parse_expr("sin(")
        assert exc.value.offset == 4
        assert "number" in exc.value.expected

    def test_precedence(self):
        assert parse_expr("1+2*x") == Add(Const(Fraction(1)),
                                          Mul(Const(Fraction(2)), X))
        assert parse_expr("(1+2)*x") == Mul(Add(Const(Fraction(1)),
                                                Const(Fraction(2))), X)

    def test_unary_minus(self):
        assert parse_expr("-x") == -X
        assert parse_expr("-3") == Const(Fraction(-3))
        assert parse_expr("2 - -3") == Const(Fraction(2)) - Const(Fraction(-3))

    def test_power_binds_tighter_than_unary_minus(self):
        e = parse_expr("-x^2")
        assert e == -(X ** 2)

    def test_decimal_literal_is_exact(self):
        e = parse_expr("0.1")
        assert isinstance(e, Const)
        assert e.value == Fraction(1, 10)

    def test_integer_exponent_only(self):
        with pytest.raises(ParseError):
            parse_expr("x^n")
        with pytest.raises(ParseError):
            parse_expr("x^2.5")
        assert parse_expr("x^-2") == X ** -2
        assert parse_expr("x^(3)") == X ** 3

    def test_unsupported_function(self):
        with pytest.raises(ParseError) as exc:
            parse_expr("exp(x)")
        assert "unsupported function" in str(exc.value)

    def test_trailing_garbage(self):
        with pytest.raises(ParseError) as exc:
            parse_expr("x )")
        assert exc.value.offset == 2

    def test_byte_offset_multibyte(self):
        with pytest.raises(ParseError) as exc:
            parse_expr("1+π")  # Greek pi is two UTF-8 bytes
        assert exc.value.offset == 2

    def test_missing_digit_after_point(self):
        with pytest.raises(ParseError):
            parse_expr("1.")


class TestPrint:
    def test_fully_parenthesized(self):
        assert to_text(parse_expr("a+b*x")) == "(a + (b * x))"

    def test_number_forms(self):
        assert to_text(Const(Fraction(3, 2))) == "1.5"
        assert to_text(Const(Fraction(1, 3))) == "(1/3)"
        assert to_text(Const(Fraction(-7))) == "-7"
        assert to_text(Const(0.5)) == "0.5"

    @given(smooth_exprs)
    def test_roundtrip_fixed_point(self, e):
        normalized = fold_constants(e)
        reparsed = fold_constants(parse_expr(to_text(e)))
        assert reparsed == normalized
        # printing the normal form is a fixed point
        assert to_text(fold_constants(parse_expr(to_text(normalized)))) \
            == to_text(normalized)


class TestEval:
    def test_square(self):
        assert eval_expr(parse_expr("x^2"), 3) == 9.0

    def test_sine_at_zero(self):
        for n in (1.0, 2.0, 17.5):
            assert eval_expr(parse_expr("sin(n*x)"), 0.0, {"n": n}) == 0.0

    def test_division_by_zero(self):
        with pytest.raises(DomainError) as exc:
            eval_expr(parse_expr("1/x"), 0.0)
        assert exc.value.subtree is not None

    def test_unbound_parameter(self):
        with pytest.raises(UnboundParameterError):
            eval_expr(parse_expr("n*x"), 1.0)

    def test_negative_power_of_zero(self):
        with pytest.raises(DomainError):
            eval_expr(X ** -1, 0.0)

    def test_pi_node(self):
        assert eval_expr(parse_expr("sin(pi/2)"), 0.0) == 1.0

    def test_grid_matches_scalar(self):
        e = parse_expr("sin(2*x) + x^2/3")
        xs = [0.1, 0.7, 2.2]
        grid = eval_on_grid(e, xs)
        assert list(grid) == [eval_expr(e, v) for v in xs]

    def test_grid_broadcasts_constants(self):
        grid = eval_on_grid(num(4), [1.0, 2.0, 3.0])
        assert list(grid) == [4.0, 4.0, 4.0]

    @given(smooth_exprs)
    def test_depends_only_on_free_params(self, e):
        names = free_params(e)
        env = {name: 0.5 for name in names}
        spoiled = dict(env, unused=123.0)
        assert eval_expr(e, 0.7, env) == eval_expr(e, 0.7, spoiled)


class TestFreeParams:
    def test_product_family(self):
        e = parse_expr("sin(m*pi*x/L)*sin(n*pi*x/L)")
        assert free_params(e) == {"m", "n", "L"}

    def test_empty(self):
        assert free_params(parse_expr("x^2")) == frozenset()

    def test_coefficients(self):
        e = parse_expr("a0 + a1*cos(pi*x/L)")
        assert free_params(e) == {"a0", "a1", "L"}


class TestSubstitute:
    def test_parameter_to_number(self):
        e = substitute(parse_expr("sin(n*x)"), {"n": 3})
        assert e == Sin(Mul(Const(Fraction(3)), X))
        assert eval_expr(e, 0.5) == math.sin(1.5)

    def test_parameter_to_expression(self):
        e = substitute(parse_expr("n*x"), {"n": parse_expr("m+1")})
        assert free_params(e) == {"m"}


class TestInterval:
    def test_width_and_contains(self):
        dom = Interval(-1, 2)
        assert dom.width == 3.0
        assert dom.contains(0.0) and not dom.contains(2.5)

    def test_reversed_rejected(self):
        with pytest.raises(ArgumentError):
            Interval(1.0, 0.0)

    def test_nonfinite_rejected(self):
        with pytest.raises(ArgumentError):
            Interval(0.0, math.inf)


class TestFoldConstants:
    def test_rational_quotient(self):
        assert fold_constants(parse_expr("3/2")) == Const(Fraction(3, 2))

    def test_zero_denominator_left_alone(self):
        e = parse_expr("1/0")
        assert fold_constants(e) == e

    def test_mixed_float(self):
        folded = fold_constants(Mul(Const(0.5), Const(Fraction(4))))
        assert folded == Const(2.0)
