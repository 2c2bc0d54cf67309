import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowcat.errors import DomainError, ParseError, UnboundVariableError
from flowcat.expr import Binary, Call, Number, Unary, Var, compile_expr, evaluate, free_variables, parse, to_source

names = st.sampled_from(["x1", "x2", "t", "omega"])
numbers = st.one_of(st.integers(0, 1000).map(float), st.floats(0, 1e6, allow_nan=False, allow_infinity=False))
leaves = st.one_of(numbers.map(Number), names.map(Var))


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda a: Binary(*a)),
        children.map(lambda c: Unary("-", c)),
        st.tuples(st.sampled_from(["sin", "cos", "exp", "sqrt", "abs"]), children).map(lambda a: Call(a[0], (a[1],))),
        st.tuples(st.sampled_from(["atan2", "min", "max"]), children, children).map(lambda a: Call(a[0], a[1:])),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


@given(trees)
def test_print_parse_round_trip(e):
    assert parse(to_source(e)) == e


@given(trees)
def test_printing_is_stable(e):
    s = to_source(e)
    assert to_source(parse(s)) == s


@pytest.mark.parametrize("src, value", [
    ("2+3*4", 14.0),
    ("2^3^2", 512.0),
    ("-2^2", -4.0),
    ("(2+3)*4", 20.0),
    ("8/4/2", 1.0),
    ("2^-1", 0.5),
    ("atan2(1, 1)*4", math.pi),
    ("min(3, x1) + max(3, x1)", 8.0),
    ("1e-3 * 1000", 1.0),
    ("pi - pi + e", math.e),
])
def test_precedence_and_functions(src, value):
    assert evaluate(parse(src), {"x1": 5.0}) == pytest.approx(value)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse("1+*2")
    assert info.value.position == 2


@pytest.mark.parametrize("src", ["", "(1+2", "1 2", "sin(1, 2)", "foo(1)", "x1 $ 2", "3+"])
def test_malformed_sources(src):
    with pytest.raises(ParseError):
        parse(src)


@pytest.mark.parametrize("src, env", [
    ("1/x1", {"x1": 0.0}),
    ("sqrt(x1)", {"x1": -1.0}),
    ("log(x1)", {"x1": 0.0}),
    ("x1^0.5", {"x1": -2.0}),
    ("exp(x1)", {"x1": 1e6}),
])
def test_domain_errors(src, env):
    e = parse(src)
    with pytest.raises(DomainError):
        evaluate(e, env)
    with pytest.raises(DomainError):
        compile_expr(e, list(env))(*env.values())


def test_unbound_variable():
    with pytest.raises(UnboundVariableError):
        evaluate(parse("x1 + y"), {"x1": 1.0})
    with pytest.raises(UnboundVariableError):
        compile_expr(parse("x1 + y"), ["x1"])


def test_free_variables():
    assert free_variables(parse("x1*cos(omega*t) + pi")) == {"x1", "omega", "t"}


@given(trees, st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 5))
def test_compiled_scalar_agrees_with_interpreter(e, x1, x2, t, omega):
    env = {"x1": x1, "x2": x2, "t": t, "omega": omega}
    try:
        expected = evaluate(e, env)
    except (DomainError, OverflowError):
        return
    fn = compile_expr(e, ["x1", "x2", "t"], {"omega": omega})
    assert fn(x1, x2, t) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_vector_mode_broadcasts():
    fn = compile_expr(parse("x1*cos(omega*t)"), ["x1", "t"], {"omega": 2.0}, vector=True)
    ts = np.linspace(0, 1, 5)
    np.testing.assert_allclose(fn(1.5, ts), 1.5 * np.cos(2.0 * ts))
