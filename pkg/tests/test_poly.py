"""Tests for the exact polynomial core: parsing, arithmetic, composition."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from milnorarc import (
    LaurentScalar,
    ParseError,
    Polynomial,
    RationalArc,
    compose_arc,
    parse,
)

VARS2 = ["x", "y"]
VARS3 = ["x", "y", "z"]


# ---------------------------------------------------------------------------
# Hypothesis strategies
# ---------------------------------------------------------------------------

rationals = st.fractions(
    min_value=Fraction(-20), max_value=Fraction(20), max_denominator=12
)


def polynomials(num_vars: int, max_degree: int = 4, max_terms: int = 6):
    exponent = st.tuples(*([st.integers(0, max_degree)] * num_vars))
    return st.dictionaries(exponent, rationals, max_size=max_terms).map(
        lambda terms: Polynomial(num_vars, terms)
    )


def points(num_vars: int):
    return st.tuples(*([rationals] * num_vars))


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class TestParser:
    def test_simple(self):
        f = parse("x + x^2*y", VARS2)
        assert f.terms == {(1, 0): Fraction(1), (2, 1): Fraction(1)}

    def test_rational_coefficients(self):
        f = parse("1/2*x - 3/4", VARS2)
        assert f.terms == {(1, 0): Fraction(1, 2), (0, 0): Fraction(-3, 4)}

    def test_implicit_multiplication(self):
        # implicit '*' is allowed only between a number and a variable
        assert parse("2x", VARS2) == parse("2*x", VARS2)
        assert parse("3x^2", VARS2) == parse("3*x^2", VARS2)
        with pytest.raises(ParseError):
            parse("x y", VARS2)

    def test_parentheses_and_power(self):
        f = parse("(x + y)^2", VARS2)
        assert f == parse("x^2 + 2*x*y + y^2", VARS2)

    def test_leading_minus(self):
        f = parse("-x + y", VARS2)
        assert f.terms == {(1, 0): Fraction(-1), (0, 1): Fraction(1)}

    def test_zero_polynomial(self):
        f = parse("x - x", VARS2)
        assert f.is_zero()
        assert f.degree == float("-inf")

    def test_unknown_variable(self):
        with pytest.raises(ParseError):
            parse("x + w", VARS2)

    def test_garbage(self):
        for bad in ["x +", "^2", "x^", "(x", "x^-2", "1/0"]:
            with pytest.raises(ParseError):
                parse(bad, VARS2)

    def test_error_position(self):
        with pytest.raises(ParseError) as info:
            parse("x + @", VARS2)
        assert info.value.position == 4

    @given(polynomials(2))
    @settings(max_examples=50, deadline=None)
    def test_text_round_trip(self, f):
        assert parse(f.to_text(VARS2), VARS2) == f

    @given(polynomials(3))
    @settings(max_examples=25, deadline=None)
    def test_text_round_trip_three_vars(self, f):
        assert parse(f.to_text(VARS3), VARS3) == f


# ---------------------------------------------------------------------------
# Arithmetic
# ---------------------------------------------------------------------------


class TestArithmetic:
    @given(polynomials(2), polynomials(2), polynomials(2))
    @settings(max_examples=40, deadline=None)
    def test_ring_axioms(self, f, g, h):
        assert f + g == g + f
        assert f * g == g * f
        assert (f + g) + h == f + (g + h)
        assert (f * g) * h == f * (g * h)
        assert f * (g + h) == f * g + f * h

    @given(polynomials(2))
    @settings(max_examples=25, deadline=None)
    def test_identities(self, f):
        zero = Polynomial.zero(2)
        one = Polynomial.constant(2, 1)
        assert f + zero == f
        assert f * one == f
        assert f - f == zero
        assert f * zero == zero

    @given(polynomials(2), points(2))
    @settings(max_examples=40, deadline=None)
    def test_evaluation_is_a_homomorphism(self, f, p):
        g = parse("1 + x*y - y^2", VARS2)
        pt = list(p)
        assert (f + g).evaluate(pt) == f.evaluate(pt) + g.evaluate(pt)
        assert (f * g).evaluate(pt) == f.evaluate(pt) * g.evaluate(pt)

    @given(polynomials(2), st.integers(0, 4))
    @settings(max_examples=25, deadline=None)
    def test_power(self, f, n):
        expected = Polynomial.constant(2, 1)
        for _ in range(n):
            expected = expected * f
        assert f ** n == expected

    def test_degree(self):
        assert parse("x^2*y + y", VARS2).degree == 3
        assert parse("5", VARS2).degree == 0

    def test_immutability(self):
        f = parse("x", VARS2)
        with pytest.raises(AttributeError):
            f.terms = {}

    def test_exact_evaluation_stays_exact(self):
        f = parse("1/3*x^2 + 1/7*y", VARS2)
        v = f.evaluate([Fraction(1, 2), Fraction(2, 3)])
        assert isinstance(v, Fraction)
        assert v == Fraction(1, 3) * Fraction(1, 4) + Fraction(1, 7) * Fraction(2, 3)

    def test_float_evaluation(self):
        f = parse("x^2 + y", VARS2)
        assert f.evaluate([2.0, 3.0]) == pytest.approx(7.0)


# ---------------------------------------------------------------------------
# Calculus
# ---------------------------------------------------------------------------


class TestPartials:
    def test_basic(self):
        f = parse("x + x^2*y", VARS2)
        assert f.partial(0) == parse("1 + 2*x*y", VARS2)
        assert f.partial(1) == parse("x^2", VARS2)

    @given(polynomials(2), polynomials(2))
    @settings(max_examples=30, deadline=None)
    def test_leibniz_rule(self, f, g):
        for i in range(2):
            lhs = (f * g).partial(i)
            rhs = f.partial(i) * g + f * g.partial(i)
            assert lhs == rhs

    @given(polynomials(3))
    @settings(max_examples=25, deadline=None)
    def test_mixed_partials_commute(self, f):
        assert f.partial(0).partial(1) == f.partial(1).partial(0)

    def test_gradient_length(self):
        f = parse("x*y*z", VARS3)
        assert len(f.gradient()) == 3


class TestSubstitute:
    def test_composition(self):
        f = parse("x^2 + y", VARS2)
        g1 = parse("x + y", VARS2)
        g2 = parse("x*y", VARS2)
        assert f.substitute([g1, g2]) == parse("(x + y)^2 + x*y", VARS2)

    @given(polynomials(2, max_degree=3, max_terms=4), points(2))
    @settings(max_examples=25, deadline=None)
    def test_substitute_commutes_with_evaluation(self, f, p):
        g1 = parse("x - y", VARS2)
        g2 = parse("x*y + 1", VARS2)
        pt = list(p)
        composed = f.substitute([g1, g2])
        assert composed.evaluate(pt) == f.evaluate([g1.evaluate(pt), g2.evaluate(pt)])


# ---------------------------------------------------------------------------
# Laurent scalars and arcs
# ---------------------------------------------------------------------------


class TestLaurentScalar:
    def test_arithmetic(self):
        a = LaurentScalar({-1: Fraction(1, 2), 1: 1})
        b = LaurentScalar({0: 1, 1: -1})
        assert (a * b).terms == {
            -1: Fraction(1, 2),
            0: Fraction(-1, 2),
            1: Fraction(1),
            2: Fraction(-1),
        }
        assert (a + b).coefficient(0) == 1

    def test_power_and_support(self):
        t_inv = LaurentScalar.term(1, -1)
        assert (t_inv ** 3).support() == [-3]

    def test_derivative(self):
        a = LaurentScalar({-2: 1, 0: 5, 3: Fraction(1, 3)})
        d = a.derivative()
        assert d.terms == {-3: Fraction(-2), 2: Fraction(1)}

    def test_evaluate(self):
        a = LaurentScalar({-1: Fraction(1, 2), 2: 3})
        assert a.evaluate(2.0) == pytest.approx(0.25 + 12.0)


class TestRationalArc:
    def test_components_and_support(self):
        xi = RationalArc(2, {-1: (Fraction(1, 2), 0), 1: (0, -1)})
        assert xi.support() == [-1, 1]
        assert xi.component(0).terms == {-1: Fraction(1, 2)}
        assert xi.component(1).terms == {1: Fraction(-1)}

    def test_escapes(self):
        assert RationalArc(2, {1: (1, 0)}).escapes_to_infinity()
        assert not RationalArc(2, {-1: (1, 0)}).escapes_to_infinity()

    def test_zero_vectors_dropped(self):
        xi = RationalArc(2, {3: (0, 0), 1: (1, 0)})
        assert xi.support() == [1]

    def test_declared_window_enforced(self):
        with pytest.raises(ValueError):
            RationalArc(2, {5: (1, 0)}, (-2, 2))

    def test_reparametrize(self):
        xi = RationalArc(2, {-1: (Fraction(1, 2), 0), 1: (0, -1)})
        eta = xi.reparametrize(Fraction(2))
        assert eta.coeffs[-1] == (Fraction(1, 4), Fraction(0))
        assert eta.coeffs[1] == (Fraction(0), Fraction(-2))

    def test_reparametrize_zero_rejected(self):
        with pytest.raises(ValueError):
            RationalArc(2, {1: (1, 0)}).reparametrize(0)


class TestComposeArc:
    def test_known_composition(self):
        # f(xi(t)) for f = x + x^2 y along xi = ((1/2) t^-1, -t) is (1/4) t^-1
        f = parse("x + x^2*y", VARS2)
        xi = RationalArc(2, {-1: (Fraction(1, 2), 0), 1: (0, -1)})
        F = compose_arc(f, xi)
        assert F.terms == {-1: Fraction(1, 4)}

    def test_constant_polynomial(self):
        f = parse("7", VARS2)
        xi = RationalArc(2, {1: (1, 1)})
        assert compose_arc(f, xi) == LaurentScalar({0: 7})

    @given(polynomials(2, max_degree=3, max_terms=4))
    @settings(max_examples=25, deadline=None)
    def test_composition_matches_float_evaluation(self, f):
        xi = RationalArc(2, {-1: (Fraction(1, 3), 1), 1: (Fraction(1, 2), Fraction(-2, 5))})
        F = compose_arc(f, xi)
        t = 1.7
        direct = f.evaluate(xi.evaluate(t))
        assert F.evaluate(t) == pytest.approx(direct, rel=1e-9, abs=1e-9)

    @given(polynomials(2, max_degree=3, max_terms=4), polynomials(2, max_degree=3, max_terms=4))
    @settings(max_examples=25, deadline=None)
    def test_composition_is_a_homomorphism(self, f, g):
        xi = RationalArc(2, {-2: (1, 0), 1: (Fraction(1, 2), -1)})
        assert compose_arc(f * g, xi) == compose_arc(f, xi) * compose_arc(g, xi)
        assert compose_arc(f + g, xi) == compose_arc(f, xi) + compose_arc(g, xi)

    def test_chain_rule_along_arc(self):
        # d/dt f(xi(t)) = sum_i (df/dx_i)(xi(t)) * xi_i'(t), exactly
        f = parse("x^3*y - 2*x*y^2 + y", VARS2)
        xi = RationalArc(2, {-1: (Fraction(2, 3), -1), 2: (1, Fraction(1, 5))})
        lhs = compose_arc(f, xi).derivative()
        rhs = LaurentScalar()
        for i in range(2):
            rhs = rhs + compose_arc(f.partial(i), xi) * xi.component(i).derivative()
        assert lhs == rhs
