"""Expression core: parsing, exact differentiation, evaluation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import central_difference, random_expression
from contactgeo import expr
from contactgeo.expr import (EvalError, ParseError, differentiate, evaluate,
                             parse, to_string)


class TestParse:
    def test_product_ast(self):
        e = parse("q1*p1")
        assert e.kind == "mul"
        assert e.args[0].name == "q1" and e.args[1].name == "p1"

    def test_rotation_generator_ast(self):
        e = parse("0.5*(q1^2 + p1^2)")
        assert e.kind == "mul"
        assert e.args[0].value == 0.5
        inner = e.args[1]
        assert inner.kind == "add"
        assert inner.args[0].kind == "pow" and inner.args[0].exponent == 2

    def test_unbalanced_paren_position(self):
        with pytest.raises(ParseError) as err:
            parse("q1*(")
        assert err.value.position == 3

    def test_unknown_function(self):
        with pytest.raises(ParseError, match="unknown function"):
            parse("sinh(q1)")

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse("q1 q2")

    def test_rational_exponent(self):
        e = parse("V^(-2/3)")
        assert e.kind == "pow"
        assert e.exponent.numerator == -2 and e.exponent.denominator == 3

    def test_bare_exponent_does_not_eat_division(self):
        # q1^2/3 is (q1^2)/3, not q1^(2/3)
        assert evaluate(parse("q1^2/4"), {"q1": 2.0}) == 1.0

    def test_scientific_notation(self):
        assert evaluate(parse("1e-3 + 2.5e2"), {}) == pytest.approx(250.001)

    def test_unary_minus_binds_inside_power(self):
        # grammar: factor := base ^ exp with base := '-' base, so -q^2 = (-q)^2
        assert evaluate(parse("-q1^2"), {"q1": 3.0}) == 9.0

    def test_whitespace(self):
        assert parse(" q1 * p1 ") == parse("q1*p1")


class TestDifferentiate:
    def test_product_rule(self):
        assert differentiate(parse("q1*p1"), "p1") == expr.var("q1")

    def test_power_rule_evaluates_to_coordinate(self):
        d = differentiate(parse("0.5*(q1^2+p1^2)"), "q1")
        for q in (0.0, 1.5, -2.2):
            assert evaluate(d, {"q1": q, "p1": 9.9}) == pytest.approx(q)

    def test_exponential_with_rational_power(self):
        e = parse("exp(S)*V^(-2/3)")
        assert differentiate(e, "S") == e

    def test_derivative_of_constant_expression(self):
        assert differentiate(parse("sin(p1) + 3"), "q1") is expr.ZERO

    def test_closure_under_repeated_differentiation(self):
        e = parse("exp(q1)*sin(p1)/(q1^2 + 1)")
        for name in ("q1", "p1", "q1"):
            e = differentiate(e, name)
        assert np.isfinite(evaluate(e, {"q1": 0.3, "p1": -1.1}))


class TestEvaluate:
    def test_product(self):
        assert evaluate(parse("q1*p1"), {"q1": 2, "p1": 3}) == 6.0

    def test_rotation_generator_value(self):
        assert evaluate(parse("0.5*(q1^2+p1^2)"), {"q1": 2, "p1": 3}) == 6.5

    def test_division_by_zero(self):
        with pytest.raises(EvalError, match="division by zero"):
            evaluate(parse("1/q1"), {"q1": 0.0})

    def test_unbound_variable(self):
        with pytest.raises(EvalError, match="unbound variable"):
            evaluate(parse("q1 + p7"), {"q1": 1.0})

    def test_log_of_nonpositive(self):
        with pytest.raises(EvalError, match="non-positive"):
            evaluate(parse("log(q1)"), {"q1": -1.0})

    def test_zero_to_negative_power(self):
        with pytest.raises(EvalError, match="negative power"):
            evaluate(parse("q1^-2"), {"q1": 0.0})

    def test_negative_base_odd_root(self):
        assert evaluate(parse("V^(2/3)"), {"V": -8.0}) == pytest.approx(4.0)

    def test_negative_base_even_root(self):
        with pytest.raises(EvalError):
            evaluate(parse("V^(1/2)"), {"V": -4.0})


NAMES = ("w", "q1", "p1", "q2", "p2")


def _safe_sample(rng, e):
    """Bindings for which e, its derivative and the central difference behave."""
    b = {name: float(rng.uniform(0.4, 1.6)) for name in NAMES}
    try:
        v = evaluate(e, b)
    except EvalError:
        return None
    if not math.isfinite(v) or abs(v) > 1e6:
        return None
    return b


def test_derivative_matches_central_differences_1000_samples():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 1000:
        e = random_expression(rng, NAMES, depth=3)
        name = str(rng.choice(NAMES))
        b = _safe_sample(rng, e)
        if b is None:
            continue
        try:
            exact = evaluate(differentiate(e, name), b)
            approx = central_difference(e, name, b)
        except EvalError:
            continue
        if not (math.isfinite(exact) and math.isfinite(approx)) or abs(exact) > 1e5:
            continue
        assert abs(exact - approx) <= 1e-6 * (1.0 + abs(exact)), to_string(e)
        checked += 1


def test_differentiation_is_linear():
    rng = np.random.default_rng(7)
    for _ in range(50):
        e1 = random_expression(rng, NAMES, depth=3)
        e2 = random_expression(rng, NAMES, depth=3)
        a = float(rng.uniform(-3, 3))
        combo = differentiate(expr.const(a) * e1 + e2, "q1")
        split = expr.const(a) * differentiate(e1, "q1") + differentiate(e2, "q1")
        b = _safe_sample(rng, combo - split)
        if b is None:
            continue
        assert abs(evaluate(combo, b) - evaluate(split, b)) <= 1e-12 * (
            1.0 + abs(evaluate(split, b)))


@st.composite
def expression_trees(draw):
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    depth = draw(st.integers(min_value=0, max_value=4))
    return random_expression(np.random.default_rng(seed), NAMES, depth)


@settings(max_examples=300, deadline=None)
@given(expression_trees())
def test_print_parse_round_trip_is_identity_on_asts(e):
    assert parse(to_string(e)) == e


@settings(max_examples=100, deadline=None)
@given(expression_trees())
def test_parse_print_parse_equals_parse(e):
    text = to_string(e)
    once = parse(text)
    assert parse(to_string(once)) == once


def test_round_trip_of_sample_texts():
    for text in ("q1*p1", "0.5*(q1^2 + p1^2)", "exp(S)*V^(-2/3)",
                 "w - q1*p1 - q2*p2", "-q1^2 + sin(p1)/cos(p1)",
                 "1.5*T - 1/V - T*log(V - 1) - 1.5*T*log(T)"):
        once = parse(text)
        assert parse(to_string(once)) == once


def test_free_variables():
    assert expr.free_variables(parse("q1*p1 + w")) == {"q1", "p1", "w"}
    assert expr.free_variables(parse("42")) == frozenset()


def test_operator_overloads_match_constructors():
    q, p = expr.var("q1"), expr.var("p1")
    assert (q + p) == parse("q1 + p1")
    assert (q - 2) == parse("q1 - 2")
    assert (3 * q) == parse("3*q1")
    assert (q / p) == parse("q1/p1")
    assert (-q) == parse("-q1")
    assert (q ** 2) == parse("q1^2")


def test_light_simplification_only():
    q = expr.var("q1")
    assert q + 0 is q
    assert 1 * q is q
    assert q - q is expr.ZERO
    assert expr.power(q, 1) is q
    # but no deep canonicalization: q*p and p*q stay distinct trees
    assert parse("q1*p1") != parse("p1*q1")
