import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from progeny.errors import EvaluationError, ExprSyntaxError
from progeny.expr import BinOp, Call, Lit, Neg, Var, evaluate, parse_rate_expr, render


def ev(text, x):
    return evaluate(parse_rate_expr(text), x)


class TestParse:
    def test_division(self):
        ast = parse_rate_expr("1000/x")
        assert ast == BinOp("/", Lit(1000.0), Var())
        assert ev("1000/x", 10.0) == 100.0

    def test_model2_equivalent(self):
        assert ev("1000*exp(-x/100)", 100.0) == pytest.approx(1000.0 * math.exp(-1.0), rel=1e-12)

    def test_sir_equivalent(self):
        assert ev("2*(1-x/1000)", 500.0) == 1.0

    def test_whitespace_insignificant(self):
        assert parse_rate_expr(" 1 + 2 * x ") == parse_rate_expr("1+2*x")

    def test_precedence(self):
        assert ev("1+2*3", 0.0) == 7.0
        assert ev("(1+2)*3", 0.0) == 9.0
        assert ev("8/4/2", 0.0) == 1.0  # left-assoc
        assert ev("2^3^2", 0.0) == 512.0  # right-assoc

    def test_power_binds_tighter_than_unary_minus(self):
        assert parse_rate_expr("-x^2") == Neg(BinOp("^", Var(), Lit(2.0)))
        assert ev("-x^2", 3.0) == -9.0
        assert ev("(-x)^2", 3.0) == 9.0
        assert ev("2^-2", 0.0) == 0.25

    def test_functions(self):
        assert ev("sqrt(x)", 16.0) == 4.0
        assert ev("log(exp(x))", 2.5) == pytest.approx(2.5, rel=1e-15)

    def test_number_forms(self):
        assert ev("1e3", 0.0) == 1000.0
        assert ev(".5", 0.0) == 0.5
        assert ev("2.5e-1", 0.0) == 0.25


class TestErrors:
    def test_empty(self):
        with pytest.raises(ExprSyntaxError):
            parse_rate_expr("   ")

    def test_unknown_identifier_offset(self):
        with pytest.raises(ExprSyntaxError) as exc:
            parse_rate_expr("2*foo(x)")
        assert exc.value.offset == 2
        assert "x" in exc.value.expected

    def test_trailing_input(self):
        with pytest.raises(ExprSyntaxError) as exc:
            parse_rate_expr("1+2)")
        assert exc.value.offset == 3

    def test_missing_operand(self):
        with pytest.raises(ExprSyntaxError) as exc:
            parse_rate_expr("1+")
        assert exc.value.offset == 2
        assert "NUMBER" in exc.value.expected

    def test_bad_character(self):
        with pytest.raises(ExprSyntaxError) as exc:
            parse_rate_expr("1 @ 2")
        assert exc.value.offset == 2

    def test_evaluation_errors(self):
        with pytest.raises(EvaluationError):
            ev("log(x-2)", 1.0)  # log of a negative number
        with pytest.raises(EvaluationError):
            ev("1/(x-1)", 1.0)  # division by zero
        with pytest.raises(EvaluationError):
            ev("exp(x)", 1e9)  # overflow to non-finite


_lits = st.one_of(
    st.integers(min_value=0, max_value=10**6).map(float),
    st.floats(min_value=0.0, max_value=1e12, allow_nan=False, allow_infinity=False),
).map(Lit)
_atoms = st.one_of(_lits, st.just(Var()))


def _extend(children):
    return st.one_of(
        st.builds(Neg, children),
        st.builds(Call, st.sampled_from(["exp", "log", "sqrt"]), children),
        st.builds(BinOp, st.sampled_from(list("+-*/^")), children, children),
    )


@settings(max_examples=300, deadline=None)
@given(st.recursive(_atoms, _extend, max_leaves=20))
def test_render_parse_roundtrip(ast):
    assert parse_rate_expr(render(ast)) == ast


@settings(max_examples=100, deadline=None)
@given(st.recursive(_atoms, _extend, max_leaves=20))
def test_render_is_stable(ast):
    text = render(ast)
    assert render(parse_rate_expr(text)) == text
