import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dgeo import expr as X
from dgeo import jet as J
from dgeo.errors import DomainError, ExprSyntaxError, UnknownIdentifier
from dgeo.oracle import mp_eval


@pytest.mark.parametrize(
    "text,env,value",
    [
        ("1+2*3", {}, 7.0),
        ("2^3^2", {}, 512.0),
        ("-2^2", {}, -4.0),
        ("cos(u)*cos(v)", {"u": 0.0, "v": 0.0}, 1.0),
        ("pi/2", {}, math.pi / 2),
        ("(u+v)/2", {"u": 1.0, "v": 2.0}, 1.5),
        ("1e-3*t", {"t": 2.0}, 2e-3),
        ("sqrt(4)+log(exp(2))", {}, 4.0),
    ],
)
def test_parse_and_eval(text, env, value):
    assert X.eval_scalar(X.parse(text), env) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize(
    "text,offset,exc",
    [
        ("", 0, ExprSyntaxError),
        ("1+", 2, ExprSyntaxError),
        ("sin(u", 5, ExprSyntaxError),
        ("foo(u)", 0, UnknownIdentifier),
        ("u + w", 4, UnknownIdentifier),
        ("2 $ 3", 2, ExprSyntaxError),
    ],
)
def test_parse_errors_carry_offset(text, offset, exc):
    with pytest.raises(exc) as info:
        X.parse(text)
    assert info.value.offset == offset


def test_symbolic_partials():
    e = X.parse("u^2*sin(v)")
    du = X.partial(e, "u")
    dv = X.partial(e, "v")
    env = {"u": 1.5, "v": 0.3}
    assert X.eval_scalar(du, env) == pytest.approx(2 * 1.5 * math.sin(0.3))
    assert X.eval_scalar(dv, env) == pytest.approx(1.5**2 * math.cos(0.3))
    assert X.free_vars(X.partial(X.parse("t*3"), "t")) == frozenset()


def test_substitute_builds_composite():
    e = X.substitute(X.parse("u*v"), {"u": X.parse("cos(t)"), "v": X.parse("t^2")})
    assert X.free_vars(e) == {"t"}
    assert X.eval_scalar(e, {"t": 0.5}) == pytest.approx(math.cos(0.5) * 0.25)


def test_domain_errors_scalar():
    with pytest.raises(DomainError):
        X.eval_scalar(X.parse("log(u)"), {"u": -1.0})
    with pytest.raises(DomainError):
        X.eval_scalar(X.parse("1/u"), {"u": 0.0})


def test_compiled_matches_interpreter():
    e = X.parse("sinh(u)/cosh(v)+tan(u*v)-v^3")
    f = X.compile_scalar(e, ("u", "v"))
    for u, v in [(0.1, 0.2), (-0.4, 0.9), (1.1, -0.3)]:
        assert f(u, v) == pytest.approx(X.eval_scalar(e, {"u": u, "v": v}), rel=1e-15)


# -- random trees ---------------------------------------------------------------------
# Functions are wrapped so every tree stays inside its real domain near t in [-1, 1].

SAFE = {
    "sin": lambda a: X.func("sin", a),
    "cos": lambda a: X.func("cos", a),
    "exp": lambda a: X.func("exp", X.func("sin", a)),
    "log": lambda a: X.func("log", X.add(X.Const(2.0), X.func("sin", a))),
    "sqrt": lambda a: X.func("sqrt", X.add(X.Const(1.5), X.func("cos", a))),
    "sinh": lambda a: X.func("sinh", X.func("cos", a)),
    "cosh": lambda a: X.func("cosh", X.func("sin", a)),
    "tan": lambda a: X.func("tan", X.mul(X.Const(0.5), X.func("sin", a))),
}

leaves = st.one_of(
    st.just(X.Var("t")),
    st.floats(-2, 2, allow_nan=False).map(lambda c: X.Const(round(c, 3))),
    st.just(X.Pi()),
)


def _extend(children):
    unary = st.tuples(st.sampled_from(sorted(SAFE)), children).map(lambda p: SAFE[p[0]](p[1]))
    binary = st.tuples(st.sampled_from(["+", "-", "*", "/"]), children, children).map(_binary)
    power = st.tuples(children, st.sampled_from([2.0, 3.0, -1.0])).map(
        lambda p: X.power(X.add(X.Const(1.5), X.func("sin", p[0])), p[1])
    )
    return st.one_of(unary, binary, power)


def _binary(p):
    op, a, b = p
    if op == "/":
        return X.div(a, X.add(X.Const(2.5), X.func("cos", b)))
    return {"+": X.add, "-": X.sub, "*": X.mul}[op](a, b)


trees = st.recursive(leaves, _extend, max_leaves=12)


def _depth(e) -> int:
    if isinstance(e, X.Unary):
        return 1 + _depth(e.arg)
    if isinstance(e, X.Binary):
        return 1 + max(_depth(e.left), _depth(e.right))
    return 0


@settings(max_examples=60, deadline=None)
@given(trees, st.floats(-1, 1))
def test_jet_matches_high_precision_differences(e, t0):
    assume(_depth(e) <= 14)
    try:
        jet = X.eval_jet(e, {"t": J.Jet.variable(t0)}).derivatives()
    except DomainError:
        assume(False)
    assume(np.all(np.isfinite(jet)) and np.max(np.abs(jet)) < 1e6)
    # mpmath's default differentiation: extrapolated central differences at 50 digits
    with mp.workdps(50):
        ref = [float(mp.diff(lambda x: mp_eval(e, {"t": x}), mp.mpf(t0), k)) for k in range(5)]
    for k in range(5):
        assert abs(jet[k] - ref[k]) <= 1e-6 * max(1.0, abs(ref[k])), (X.to_string(e), k, jet[k], ref[k])


@settings(max_examples=60, deadline=None)
@given(trees, st.floats(-1, 1))
def test_print_parse_round_trip(e, t0):
    text = X.to_string(e)
    back = X.parse(text)
    try:
        a = X.eval_scalar(e, {"t": t0})
        b = X.eval_scalar(back, {"t": t0})
    except DomainError:
        assume(False)
    assert abs(a - b) <= 1e-14 * max(1.0, abs(a))
    assert X.to_string(back) == text


@settings(max_examples=40, deadline=None)
@given(trees, st.floats(-1, 1))
def test_partial_commutes_with_evaluation(e, t0):
    """The symbolic derivative evaluated equals the first jet coefficient."""
    try:
        sym = X.eval_scalar(X.partial(e, "t"), {"t": t0})
        jet = X.eval_jet(e, {"t": J.Jet.variable(t0, 1)}).c[1]
    except DomainError:
        assume(False)
    assume(abs(sym) < 1e8)
    assert abs(sym - jet) <= 1e-12 * max(1.0, abs(sym))
