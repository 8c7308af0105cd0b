import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from youngmeasure.expr import (
    FUNCTIONS,
    BinOp,
    Call,
    Const,
    ExprDomainError,
    ExprSyntaxError,
    Neg,
    Pi,
    Pow,
    UnknownIdentifierError,
    Var,
    differentiate,
    evaluate,
    lambdify,
    parse,
    render,
)


def test_parse_product():
    assert parse("3*x") == BinOp("*", Const(3), Var("x"))


def test_parse_sine_argument():
    assert parse("sin(2*pi*x)") == Call("sin", BinOp("*", BinOp("*", Const(2), Pi()), Var("x")))


def test_fraction_literal_is_folded():
    assert parse("2/3") == Const(Fraction(2, 3))
    assert parse("-1/4") == Const(Fraction(-1, 4))


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("3*/x")
    assert info.value.offset == 2
    assert info.value.expected


def test_offset_counts_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse("é + ")
    # the unknown character sits at byte 0; the error is reported there
    assert info.value.offset == 0


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse("tan(x)")


def test_mixed_variables_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("x + y")


@pytest.mark.parametrize("bad", ["", "   ", "x^", "x^1.5", "(x", "x)", "sin x", "1//2"])
def test_malformed(bad):
    with pytest.raises(ExprSyntaxError):
        parse(bad)


@pytest.mark.parametrize(
    "src, x, want",
    [
        ("3*x", 1 / 6, 0.5),
        ("(3/2)*x + 1/4", 0.5, 1.0),
        ("sin(2*pi*x)", 0.0, 0.0),
        ("x^2 - 2*x + 1", 3.0, 4.0),
        ("-x^2", 3.0, -9.0),
        ("2^-1", 0.0, 0.5),
        ("abs(x - 5)", 2.0, 3.0),
        ("exp(ln(x))", 7.0, 7.0),
    ],
)
def test_evaluate(src, x, want):
    assert evaluate(parse(src), x) == pytest.approx(want, rel=1e-15, abs=1e-15)


def test_unary_minus_binds_looser_than_power():
    assert evaluate(parse("-2^2"), 0.0) == -4.0


@pytest.mark.parametrize("src, x", [("1/x", 0.0), ("ln(x)", 0.0), ("ln(x)", -1.0), ("sqrt(x)", -1.0), ("x^-1", 0.0)])
def test_domain_errors(src, x):
    with pytest.raises(ExprDomainError):
        evaluate(parse(src), x)


def test_domain_error_names_subtree():
    with pytest.raises(ExprDomainError) as info:
        evaluate(parse("1 + ln(x - 2)"), 1.0)
    assert "ln(x - 2)" in str(info.value)


def test_array_evaluation_matches_scalar():
    e = parse("sin(2*pi*x) + x^3/7")
    xs = np.linspace(-2, 2, 41)
    vec = evaluate(e, xs)
    assert np.array_equal(vec, np.array([evaluate(e, float(x)) for x in xs]))


@pytest.mark.parametrize(
    "src, want",
    [("3*x", "3"), ("sin(2*pi*x)", "2*pi*cos(2*pi*x)"), ("x^2", "2*x")],
)
def test_differentiate_examples(src, want):
    assert render(differentiate(parse(src))) == want


def test_abs_derivative_undefined_at_zero():
    d = differentiate(parse("abs(x)"))
    assert evaluate(d, -2.0) == -1.0
    with pytest.raises(ExprDomainError):
        evaluate(d, 0.0)


def test_lambdify_agrees():
    e = parse("exp(-x^2)*cos(3*x) - abs(x)/(1 + x^2)")
    xs = np.linspace(-3, 3, 101)
    assert np.allclose(lambdify(e)(xs), evaluate(e, xs), rtol=0, atol=1e-15)


# -- properties --------------------------------------------------------------

consts = st.fractions(min_value=0, max_value=50, max_denominator=12).map(Const)
leaves = st.one_of(consts, st.just(Var("x")), st.just(Pi()))


def _extend(children):
    return st.one_of(
        st.builds(Neg, children),
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        st.builds(Pow, children, st.integers(-3, 4)),
        st.builds(Call, st.sampled_from(FUNCTIONS), children),
    )


def _canonical(e):
    """Trees the parser can produce: constants nonnegative, no Neg(Const),
    no Const/Const division (those fold)."""
    if isinstance(e, Neg):
        return not isinstance(e.arg, (Const, Neg)) and _canonical(e.arg)
    if isinstance(e, BinOp):
        if e.op == "/" and isinstance(e.left, Const) and isinstance(e.right, Const):
            return False
        return _canonical(e.left) and _canonical(e.right)
    if isinstance(e, Const):
        return e.value.denominator == 1
    return all(_canonical(c) for c in e.children())


trees = st.recursive(leaves, _extend, max_leaves=12)


@given(trees)
def test_render_round_trip(e):
    assume(_canonical(e))
    assert parse(render(e)) == e


smooth = st.recursive(
    st.one_of(st.integers(1, 3).map(Const), st.just(Var("x")), st.just(Pi())),
    lambda ch: st.one_of(
        st.builds(BinOp, st.sampled_from("+-*"), ch, ch),
        st.builds(Pow, ch, st.integers(0, 3)),
        st.builds(Call, st.sampled_from(("sin", "cos", "exp")), ch),
    ),
    max_leaves=5,
)


@given(smooth, st.integers(0, 2**32 - 1))
def test_derivative_matches_central_difference(e, seed):
    d = differentiate(e)
    xs = np.random.default_rng(seed).uniform(-1, 1, 100)
    h = 1e-5
    fd = (evaluate(e, xs + h) - evaluate(e, xs - h)) / (2 * h)
    exact = evaluate(d, xs)
    # skip trees whose third derivative swamps the O(h^2) truncation budget
    curv = np.abs(evaluate(differentiate(differentiate(d)), xs))
    ok = curv * h * h / 6 < 1e-7 * np.maximum(np.abs(exact), 1e-3)
    assume(ok.sum() >= 50)
    err = np.abs(fd - exact)[ok]
    assert np.all(err <= np.maximum(1e-6 * np.abs(exact[ok]), 1e-9))


@given(smooth, st.floats(-1, 1))
def test_evaluation_is_deterministic(e, x):
    assert evaluate(e, x) == evaluate(e, x)
