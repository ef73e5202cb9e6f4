import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from trigcalc import (
    ArgumentError, Const, DomainError, Interval, Partition, eval_expr,
    extreme_bounds, integrate_refine, integrate_signed, make_partition,
    parse_expr, riemann_sum,
)


class TestPartition:
    def test_midpoint_two_cells(self):
        p = make_partition(Interval(0, 1), 2, "midpoint")
        assert p.points == (0.0, 0.5, 1.0)
        assert p.tags == (0.25, 0.75)

    def test_single_cell_left(self):
        L = 2.5
        p = make_partition(Interval(-L, L), 1, "left")
        assert p.points == (-L, L)
        assert p.tags == (-L,)

    def test_reversed_interval_rejected(self):
        with pytest.raises(ArgumentError):
            make_partition(Interval(0, 1), 4, "midpoint")
            # Interval itself rejects reversed bounds:
        with pytest.raises(ArgumentError):
            Interval(1, 0)

    def test_zero_cells_rejected(self):
        with pytest.raises(ArgumentError):
            make_partition(Interval(0, 1), 0)

    def test_bad_rule_rejected(self):
        with pytest.raises(ArgumentError):
            make_partition(Interval(0, 1), 4, "simpson")

    def test_tag_outside_cell_rejected(self):
        with pytest.raises(ArgumentError):
            Partition((0.0, 1.0), (1.5,))

    def test_non_increasing_rejected(self):
        with pytest.raises(ArgumentError):
            Partition((0.0, 0.0, 1.0), (0.0, 0.5))


class TestRiemannSum:
    def test_constant_telescopes(self):
        p = make_partition(Interval(-2, 5), 13, "right")
        assert riemann_sum(Const(Fraction(1)), p) == pytest.approx(7.0, abs=1e-12)

    def test_midpoint_exact_for_linear(self):
        p = make_partition(Interval(0, 1), 1, "midpoint")
        assert riemann_sum(parse_expr("x"), p) == 0.5

    def test_sine_refined(self, pi):
        # oracle: refined value of the integral of sin over [0, pi] is 2
        p = make_partition(Interval(0, pi), 1024, "midpoint")
        assert riemann_sum(parse_expr("sin(x)"), p) == pytest.approx(2.0, abs=1e-5)

    def test_error_carries_subinterval(self):
        # tag the second cell at the singularity of 1/x
        bad = Partition((-1.0, 0.0, 1.0), (-0.5, 0.0))
        with pytest.raises(DomainError) as exc:
            riemann_sum(parse_expr("1/x"), bad)
        assert "subinterval 1" in str(exc.value)


class TestIntegrateRefine:
    def test_triangle_area(self):
        est = integrate_refine(parse_expr("x"), Interval(0, 1), tol=1e-10)
        assert est.converged
        assert est.value == pytest.approx(0.5, abs=1e-9)

    def test_sine_matches_antiderivative(self, pi):
        est = integrate_refine(parse_expr("sin(x)"), Interval(0, pi), tol=1e-8)
        assert est.converged
        assert est.value == pytest.approx(2.0, abs=1e-7)

    def test_empty_interval_is_exact_zero(self):
        est = integrate_refine(parse_expr("sin(x) + 100"), Interval(2.0, 2.0))
        assert est.value == 0.0
        assert est.levels_used == 0
        assert est.converged

    def test_invariant_converged_implies_small_delta(self):
        est = integrate_refine(parse_expr("x^2"), Interval(-1, 2), tol=1e-9)
        assert est.converged and abs(est.last_delta) <= 1e-9

    def test_level_cap_yields_nonconverged(self):
        jump = lambda xs: np.sign(xs - 1.0 / 3.0)
        est = integrate_refine(jump, Interval(0, 1), tol=1e-13, max_doublings=5)
        assert not est.converged  # no exception

    def test_theorem_bounds_hold(self, pi):
        f = parse_expr("sin(x)*x + 1")
        dom = Interval(0, pi)
        est = integrate_refine(f, dom, tol=1e-9)
        m, M = est.bounds
        width = dom.width
        slack = 1e-6 * (1 + abs(est.value))
        assert m * width - slack <= est.value <= M * width + slack

    def test_signed_reversal(self):
        f = parse_expr("x^2")
        fwd = integrate_signed(f, 0.0, 2.0, tol=1e-10)
        back = integrate_signed(f, 2.0, 0.0, tol=1e-10)
        assert back.value == -fwd.value

    def test_additivity(self):
        f = parse_expr("sin(3*x) + x")
        tol = 1e-9
        whole = integrate_refine(f, Interval(0.0, 2.0), tol=tol).value
        left = integrate_refine(f, Interval(0.0, 0.7), tol=tol).value
        right = integrate_refine(f, Interval(0.7, 2.0), tol=tol).value
        assert whole == pytest.approx(left + right, abs=2 * tol)

    def test_linearity(self):
        f = parse_expr("sin(x)")
        g = parse_expr("x^2")
        combo = parse_expr("2*sin(x) - 3*x^2")
        tol = 1e-9
        dom = Interval(-1.0, 1.5)
        lhs = integrate_refine(combo, dom, tol=tol).value
        rhs = 2 * integrate_refine(f, dom, tol=tol).value \
            - 3 * integrate_refine(g, dom, tol=tol).value
        assert lhs == pytest.approx(rhs, abs=2 * tol)


class TestExtremeBounds:
    def test_sine_bounds(self, pi):
        m, M = extreme_bounds(parse_expr("sin(x)"), Interval(0, pi), grid=1001)
        assert m == pytest.approx(0.0, abs=1e-6)
        assert M == pytest.approx(1.0, abs=1e-6)

    def test_constant(self):
        m, M = extreme_bounds(Const(Fraction(3)), Interval(0, 1))
        assert m == pytest.approx(3.0, abs=1e-8)
        assert M == pytest.approx(3.0, abs=1e-8)
        assert m <= 3.0 <= M  # widening keeps the true value inside

    def test_monotone_attains_endpoints(self):
        m, M = extreme_bounds(parse_expr("x"), Interval(-1, 2))
        assert m == pytest.approx(-1.0, abs=1e-8)
        assert M == pytest.approx(2.0, abs=1e-8)

    def test_small_grid_rejected(self):
        with pytest.raises(ArgumentError):
            extreme_bounds(parse_expr("x"), Interval(0, 1), grid=1)


class TestTheoremOneInequality:
    @given(st.sampled_from(["left", "midpoint", "right"]),
           st.integers(min_value=1, max_value=200))
    @settings(max_examples=30)
    def test_any_rule_any_n(self, rule, n):
        f = parse_expr("sin(2*x) + x^2/4")
        dom = Interval(-1.5, 2.0)
        p = make_partition(dom, n, rule)
        total = riemann_sum(f, p)
        m, M = extreme_bounds(f, dom, grid=4097)
        width = dom.width
        slack = 1e-6 * (1 + abs(total))
        assert m * width - slack <= total <= M * width + slack
