"""Formula language for surfaces and curves.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | 'pi' | var | func '(' expr ')' | '(' expr ')'

Variables are ``u``, ``v`` and ``t``.  Expressions are immutable trees that
can be differentiated symbolically, substituted into each other, evaluated on
floats, compiled to plain Python callables, or evaluated over Taylor jets.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping

from . import jet as J
from .errors import DomainError, ExprSyntaxError, UnknownIdentifier

VARIABLES = ("u", "v", "t")
FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh")


class Expr:
    """Base class of expression nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Pi(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ValueError(f"unknown variable {self.name!r}")


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # 'neg' or a function name
    arg: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op == "^" and not isinstance(self.right, Const):
            raise ValueError("pow exponent must be a constant node")


ZERO = Const(0.0)
ONE = Const(1.0)


# -- smart constructors (constant folding only) -------------------------------


def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def add(a: Expr, b: Expr) -> Expr:
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    return Binary("/", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def power(a: Expr, p: float) -> Expr:
    if p == 0.0:
        return ONE
    if p == 1.0:
        return a
    return Binary("^", a, Const(float(p)))


def func(name: str, a: Expr) -> Expr:
    return Unary(name, a)


# -- parsing -------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        n = len(text)
        while True:
            while pos < n and text[pos].isspace():
                pos += 1
            if pos >= n:
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, tok=None):
        tok = tok or self.peek()
        found = "end of input" if tok[0] == "end" else repr(tok[1])
        raise ExprSyntaxError(f"{message}, found {found}", tok[2], self.text)

    def expect(self, op: str):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != op:
            self.fail(f"expected {op!r}")
        self.take()

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.peek() == ("op", "-", self.peek()[2]):
            self.take()
            return Unary("neg", self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            start = self.peek()
            exponent = self.factor()
            if free_vars(exponent):
                raise ExprSyntaxError("exponent must be a constant", start[2], self.text)
            value = eval_scalar(exponent, {})
            return Binary("^", base, Const(float(value)))
        return base

    def atom(self) -> Expr:
        kind, text, offset = self.peek()
        if kind == "num":
            self.take()
            return Const(float(text))
        if kind == "name":
            self.take()
            if text == "pi":
                return Pi()
            if text in VARIABLES:
                return Var(text)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(text, arg)
            raise UnknownIdentifier(f"unknown identifier {text!r}", offset, self.text)
        if kind == "op" and text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected a number, variable, function or '('")


def parse(text: str) -> Expr:
    """Parse formula text into an expression tree."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, text)
    p = _Parser(text)
    node = p.expr()
    if p.peek()[0] != "end":
        p.fail("unexpected trailing input")
    return node


# -- printing ------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _fmt(x: float) -> str:
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return 3
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return 3
    return 5


def to_string(e: Expr, need: int = 0) -> str:
    """Render an expression so that :func:`parse` reads it back."""
    if isinstance(e, Const):
        s = "-" + _fmt(-e.value) if _prec(e) == 3 else _fmt(e.value)
    elif isinstance(e, Pi):
        s = "pi"
    elif isinstance(e, Var):
        s = e.name
    elif isinstance(e, Unary):
        if e.op == "neg":
            s = "-" + to_string(e.arg, 3)
        else:
            s = f"{e.op}({to_string(e.arg)})"
    elif isinstance(e, Binary):
        p = _PREC[e.op]
        if e.op == "^":
            s = f"{to_string(e.left, 5)}^{to_string(e.right, 3)}"
        else:
            s = f"{to_string(e.left, p)}{e.op}{to_string(e.right, p + 1)}"
    else:
        raise TypeError(f"not an expression: {e!r}")
    if _prec(e) < need:
        return f"({s})"
    return s


# -- structure -----------------------------------------------------------------


def free_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Unary):
        return free_vars(e.arg)
    if isinstance(e, Binary):
        return free_vars(e.left) | free_vars(e.right)
    return frozenset()


def partial(e: Expr, var: str) -> Expr:
    """Exact symbolic partial derivative with respect to ``var``."""
    if var not in VARIABLES:
        raise ValueError(f"unknown variable {var!r}")
    if isinstance(e, (Const, Pi)):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, Unary):
        a = e.arg
        da = partial(a, var)
        if _is(da, 0.0):
            return ZERO
        op = e.op
        if op == "neg":
            return neg(da)
        if op == "sin":
            outer = func("cos", a)
        elif op == "cos":
            outer = neg(func("sin", a))
        elif op == "tan":
            outer = div(ONE, power(func("cos", a), 2.0))
        elif op == "exp":
            outer = e
        elif op == "log":
            return div(da, a)
        elif op == "sqrt":
            return div(da, mul(Const(2.0), e))
        elif op == "sinh":
            outer = func("cosh", a)
        elif op == "cosh":
            outer = func("sinh", a)
        else:
            raise ValueError(f"unknown function {op!r}")
        return mul(outer, da)
    if isinstance(e, Binary):
        a, b = e.left, e.right
        if e.op == "+":
            return add(partial(a, var), partial(b, var))
        if e.op == "-":
            return sub(partial(a, var), partial(b, var))
        if e.op == "*":
            return add(mul(partial(a, var), b), mul(a, partial(b, var)))
        if e.op == "/":
            da, db = partial(a, var), partial(b, var)
            if _is(db, 0.0):
                return div(da, b)
            return div(sub(mul(da, b), mul(a, db)), power(b, 2.0))
        if e.op == "^":
            p = e.right.value
            da = partial(a, var)
            if _is(da, 0.0):
                return ZERO
            return mul(mul(Const(p), power(a, p - 1.0)), da)
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Simultaneous substitution of variables; unmapped variables stay put."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Unary):
        return Unary(e.op, substitute(e.arg, mapping))
    if isinstance(e, Binary):
        return Binary(e.op, substitute(e.left, mapping), substitute(e.right, mapping))
    return e


# -- scalar evaluation -----------------------------------------------------------


def _div(a, b):
    if abs(b) <= J.DIV_EPS:
        raise DomainError("division by ~0")
    return a / b


def _log(a):
    if a <= 0.0:
        raise DomainError("log of a non-positive value")
    return math.log(a)


def _sqrt(a):
    if a < 0.0:
        raise DomainError("sqrt of a negative value")
    return math.sqrt(a)


def _pow(a, p):
    if p.is_integer():
        n = int(p)
        if n < 0:
            return _div(1.0, a ** (-n))
        return a**n
    if a <= 0.0:
        raise DomainError("non-integer power of a non-positive value")
    return math.exp(p * math.log(a))


def _exp(a):
    try:
        return math.exp(a)
    except OverflowError as err:
        raise DomainError("exp overflow") from err


_SCALAR = {
    "neg": lambda a: -a,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "sinh": math.sinh,
    "cosh": math.cosh,
}


def eval_scalar(e: Expr, values: Mapping[str, float]) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Pi):
        return math.pi
    if isinstance(e, Var):
        try:
            return float(values[e.name])
        except KeyError:
            raise KeyError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Unary):
        return _SCALAR[e.op](eval_scalar(e.arg, values))
    a = eval_scalar(e.left, values)
    if e.op == "^":
        return _pow(a, e.right.value)
    b = eval_scalar(e.right, values)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    return _div(a, b)


def _codegen(e: Expr) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Pi):
        return "_pi"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-{_codegen(e.arg)})"
        return f"_{e.op}({_codegen(e.arg)})"
    a = _codegen(e.left)
    if e.op == "^":
        p = e.right.value
        if p == 2.0:
            return f"({a})**2"
        return f"_powf({a}, {p!r})"
    b = _codegen(e.right)
    if e.op == "/":
        return f"_divf({a}, {b})"
    return f"({a} {e.op} {b})"


_NAMESPACE = {
    "_pi": math.pi,
    "_divf": _div,
    "_powf": _pow,
    "_neg": _SCALAR["neg"],
    **{f"_{name}": _SCALAR[name] for name in FUNCTIONS},
}


def compile_scalar(e: Expr, args: tuple[str, ...] = VARIABLES) -> Callable[..., float]:
    """Compile to a plain Python function of positional float arguments."""
    src = f"lambda {', '.join(args)}: {_codegen(e)}"
    fn = eval(compile(src, "<dgeo-expr>", "eval"), dict(_NAMESPACE))

    def call(*xs):
        try:
            return fn(*xs)
        except (ValueError, ZeroDivisionError, OverflowError) as err:
            raise DomainError(str(err)) from err

    call.source = src
    return call


# -- jet evaluation --------------------------------------------------------------

_JET = {
    "sin": J.sin,
    "cos": J.cos,
    "tan": J.tan,
    "exp": J.exp,
    "log": J.log,
    "sqrt": J.sqrt,
    "sinh": J.sinh,
    "cosh": J.cosh,
}


def _jet_eval(e: Expr, b: Mapping[str, J.Jet]):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Pi):
        return math.pi
    if isinstance(e, Var):
        try:
            return b[e.name]
        except KeyError:
            raise KeyError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Unary):
        a = _jet_eval(e.arg, b)
        if e.op == "neg":
            return -a
        if isinstance(a, J.Jet):
            return _JET[e.op](a)
        return _SCALAR[e.op](a)
    a = _jet_eval(e.left, b)
    if e.op == "^":
        p = e.right.value
        if isinstance(a, J.Jet):
            return a**p
        return _pow(a, p)
    c = _jet_eval(e.right, b)
    if e.op == "+":
        return a + c
    if e.op == "-":
        return a - c
    if e.op == "*":
        return a * c
    if isinstance(c, J.Jet):
        return a / c
    return a / c if isinstance(a, J.Jet) and abs(c) > J.DIV_EPS else _div(a, c)


def eval_jet(e: Expr, bindings: Mapping[str, J.Jet]) -> J.Jet:
    """Taylor jet of ``e`` composed with the bound jets."""
    out = _jet_eval(e, bindings)
    if isinstance(out, J.Jet):
        return out
    order = min((j.order for j in bindings.values()), default=J.ORDER)
    shape = ()
    for j in bindings.values():
        shape = j.shape
        break
    return J.Jet.constant(out, order, shape)
