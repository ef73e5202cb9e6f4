import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from trigcalc import (
    Add, Const, Cos, Interval, Mul, Param, Sin, X, check_derivative,
    differentiate, eval_expr, free_params, parse_expr, simplify, to_text,
)
from conftest import smooth_exprs

N = Param("n")


class TestDifferentiate:
    def test_sine_with_frequency_raw_shape(self):
        # product rule leaves the inner derivative unsimplified
        raw = differentiate(parse_expr("sin(n*x)"))
        expected = Mul(Cos(Mul(N, X)),
                       Add(Mul(N, Const(Fraction(1))), Mul(X, Const(Fraction(0)))))
        assert raw == expected

    def test_sine_with_frequency_simplified(self):
        raw = differentiate(parse_expr("sin(n*x)"))
        assert simplify(raw) == parse_expr("n*cos(n*x)")

    def test_constant_rule(self):
        assert simplify(differentiate(Const(Fraction(5)))) == Const(Fraction(0))

    def test_cube(self):
        d = simplify(differentiate(parse_expr("x^3")))
        assert d == parse_expr("3*x^2")
        # independent finite-difference oracle at 10 random points
        rng = random.Random(20240817)
        h = 1e-6
        for _ in range(10):
            x = rng.uniform(-2.0, 2.0)
            fd = ((x + h) ** 3 - (x - h) ** 3) / (2 * h)
            assert eval_expr(d, x) == pytest.approx(fd, rel=1e-7, abs=1e-7)

    def test_quotient_rule(self):
        e = parse_expr("sin(x)/(x^2+1)")
        d = differentiate(e)
        x = 0.8
        h = 1e-6
        fd = (eval_expr(e, x + h) - eval_expr(e, x - h)) / (2 * h)
        assert eval_expr(d, x) == pytest.approx(fd, rel=1e-8)

    @given(smooth_exprs)
    @settings(max_examples=60)
    def test_derivative_passes_check(self, e):
        env = {name: 0.8 for name in free_params(e)}
        report = check_derivative(differentiate(e), e, Interval(0.25, 1.25),
                                  env, 1e-5, samples=64)
        assert report.passed, to_text(e)

    def test_linearity_numerically(self):
        f = parse_expr("sin(2*x)")
        g = parse_expr("x^3")
        combo = simplify(2.5 * f + (-1.5) * g)
        d_combo = differentiate(combo)
        d_parts = simplify(2.5 * differentiate(f) + (-1.5) * differentiate(g))
        for x in (0.1, 0.5, 1.3):
            assert eval_expr(d_combo, x) == pytest.approx(eval_expr(d_parts, x),
                                                          rel=1e-12, abs=1e-12)


class TestSimplify:
    def test_cleans_product_rule_output(self):
        e = parse_expr("cos(n*x)*(n*1 + x*0)")
        assert simplify(e) == parse_expr("n*cos(n*x)")

    def test_additive_identity(self):
        assert simplify(parse_expr("x + 0")) == X

    def test_constant_folding(self):
        assert simplify(parse_expr("(2*3)*x")) == parse_expr("6*x")

    def test_zero_minus(self):
        assert simplify(parse_expr("0 - sin(x)")) == -Sin(X)

    def test_division_by_one(self):
        assert simplify(parse_expr("sin(x)/1")) == Sin(X)

    def test_power_identities(self):
        assert simplify(X ** 1) == X
        assert simplify(parse_expr("sin(x)^0")) == Const(Fraction(1))

    def test_double_negation(self):
        assert simplify(-(-X)) == X

    @given(smooth_exprs)
    @settings(max_examples=80)
    def test_preserves_semantics(self, e):
        env = {name: -0.6 for name in free_params(e)}
        tidy = simplify(e)
        for x in (0.2, 0.9, 1.7):
            a = eval_expr(e, x, env)
            b = eval_expr(tidy, x, env)
            assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


class TestCheckDerivative:
    def test_frequency_pair_passes(self, pi):
        report = check_derivative(parse_expr("n*cos(n*x)"), parse_expr("sin(n*x)"),
                                  Interval(-pi, pi), {"n": 3.0}, 1e-6)
        assert report.passed
        assert report.sample_count >= 64

    def test_constant_antiderivative(self):
        report = check_derivative(Const(Fraction(0)), Const(Fraction(5)),
                                  Interval(0, 1), None, 1e-6)
        assert report.passed
        assert report.max_relative_deviation == 0.0

    def test_wrong_frequency_fails(self):
        # deviation |2cos(2x) - cos(x)| stays far from zero on [0, 1]
        report = check_derivative(parse_expr("cos(x)"), parse_expr("sin(2*x)"),
                                  Interval(0, 1), None, 1e-6)
        assert not report.passed
        assert report.max_relative_deviation > 1e-2

    def test_report_invariant(self, pi):
        report = check_derivative(parse_expr("cos(x)"), parse_expr("sin(x)"),
                                  Interval(-pi, pi), None, 1e-6)
        assert report.passed == (report.max_relative_deviation <= report.tolerance)
        assert report.step_sizes == (1e-4, 1e-5, 1e-6)
