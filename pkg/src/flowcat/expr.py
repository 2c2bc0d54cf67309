"""Scalar arithmetic expressions: parsing, evaluation and fast closures.

Grammar, lowest to highest precedence::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

``pi`` and ``e`` are constants. A name followed by ``(`` must be one of the
known functions; any other name is a variable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .errors import DomainError, ParseError, UnboundVariableError


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expression"
    rhs: "Expression"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expression", ...]


Expression = Union[Number, Var, Unary, Binary, Call]

FUNCTION_ARITY = {
    "sin": 1, "cos": 1, "tan": 1, "exp": 1, "log": 1, "sqrt": 1,
    "abs": 1, "floor": 1, "atan2": 2, "min": 2, "max": 2,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.peek()
        if val != value or kind != "op":
            what = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {what}", pos)
        self.take()

    def parse(self) -> Expression:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return e

    def expr(self) -> Expression:
        lhs = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            lhs = Binary(op, lhs, self.term())
        return lhs

    def term(self) -> Expression:
        lhs = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            lhs = Binary(op, lhs, self.unary())
        return lhs

    def unary(self) -> Expression:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Unary("-", self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        kind, val, pos = self.take()
        if kind == "num":
            return Number(float(val))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                if val not in FUNCTION_ARITY:
                    raise ParseError(f"unknown function {val!r}", pos)
                self.take()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCTION_ARITY[val]:
                    raise ParseError(
                        f"{val} takes {FUNCTION_ARITY[val]} argument(s), got {len(args)}", pos
                    )
                return Call(val, tuple(args))
            if val in CONSTANTS:
                return Number(CONSTANTS[val])
            return Var(val)
        if (kind, val) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {what}", pos)


def parse(text: str) -> Expression:
    """Parse ``text`` into an expression tree, raising :class:`ParseError`."""
    if not isinstance(text, str):
        raise ParseError(f"expression source must be a string, got {type(text).__name__}", 0)
    return _Parser(text).parse()


def free_variables(e: Expression) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Number):
        return frozenset()
    if isinstance(e, Unary):
        return free_variables(e.arg)
    if isinstance(e, Binary):
        return free_variables(e.lhs) | free_variables(e.rhs)
    out: frozenset[str] = frozenset()
    for a in e.args:
        out |= free_variables(a)
    return out


# -- scalar arithmetic with domain checks -------------------------------------

def _div(a, b):
    if b == 0:
        raise DomainError("division", b)
    return a / b


def _pow(a, b):
    if a < 0 and b != math.floor(b):
        raise DomainError("^ (negative base, fractional exponent)", a)
    if a == 0 and b < 0:
        raise DomainError("^ (zero base, negative exponent)", b)
    try:
        return math.pow(a, b)
    except OverflowError:
        raise DomainError("^ (overflow)", (a, b)) from None


def _log(a):
    if a <= 0:
        raise DomainError("log", a)
    return math.log(a)


def _sqrt(a):
    if a < 0:
        raise DomainError("sqrt", a)
    return math.sqrt(a)


def _exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        raise DomainError("exp (overflow)", a) from None


_SCALAR_FUNCS: dict[str, Callable] = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": _exp, "log": _log,
    "sqrt": _sqrt, "abs": abs, "floor": lambda a: float(math.floor(a)),
    "atan2": math.atan2, "min": min, "max": max,
}
_SCALAR_OPS: dict[str, Callable] = {
    "+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b,
    "/": _div, "^": _pow,
}


# -- vectorized counterparts ---------------------------------------------------

def _vdiv(a, b):
    if np.any(np.asarray(b) == 0):
        raise DomainError("division", 0.0)
    return np.divide(a, b)


def _vpow(a, b):
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    if np.any((a_arr < 0) & (b_arr != np.floor(b_arr))):
        raise DomainError("^ (negative base, fractional exponent)", float(a_arr.min()))
    if np.any((a_arr == 0) & (b_arr < 0)):
        raise DomainError("^ (zero base, negative exponent)", 0.0)
    return np.power(a_arr, b_arr)


def _vlog(a):
    if np.any(np.asarray(a) <= 0):
        raise DomainError("log", float(np.min(a)))
    return np.log(a)


def _vsqrt(a):
    if np.any(np.asarray(a) < 0):
        raise DomainError("sqrt", float(np.min(a)))
    return np.sqrt(a)


_VECTOR_FUNCS: dict[str, Callable] = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": _vlog,
    "sqrt": _vsqrt, "abs": np.abs, "floor": np.floor, "atan2": np.arctan2,
    "min": np.minimum, "max": np.maximum,
}
_VECTOR_OPS: dict[str, Callable] = {
    "+": np.add, "-": np.subtract, "*": np.multiply, "/": _vdiv, "^": _vpow,
}


def evaluate(e: Expression, env: Mapping[str, float]) -> float:
    """Evaluate ``e`` with variables bound by ``env``."""
    if isinstance(e, Number):
        return e.value
    if isinstance(e, Var):
        try:
            return float(env[e.name])
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Unary):
        return -evaluate(e.arg, env)
    if isinstance(e, Binary):
        return _SCALAR_OPS[e.op](evaluate(e.lhs, env), evaluate(e.rhs, env))
    result = _SCALAR_FUNCS[e.fn](*(evaluate(a, env) for a in e.args))
    if not math.isfinite(result):
        raise DomainError(e.fn, result)
    return float(result)


_NAMESPACE: dict[str, Callable] = {f"_f_{k}": v for k, v in _SCALAR_FUNCS.items()}
_NAMESPACE.update(_div=_div, _pow=_pow)


def python_source(e: Expression, names: Mapping[str, str], constants: Mapping[str, float]) -> str:
    """Fully parenthesized Python source for ``e``; runs in :data:`_NAMESPACE`.

    ``names`` maps free variables to Python identifiers; ``constants`` are inlined.
    """
    if isinstance(e, Number):
        return f"({e.value!r})"
    if isinstance(e, Var):
        if e.name in names:
            return names[e.name]
        if e.name in constants:
            return f"({float(constants[e.name])!r})"
        raise UnboundVariableError(e.name)
    if isinstance(e, Unary):
        return f"(-{python_source(e.arg, names, constants)})"
    if isinstance(e, Binary):
        lhs, rhs = python_source(e.lhs, names, constants), python_source(e.rhs, names, constants)
        if e.op == "/":
            return f"_div({lhs}, {rhs})"
        if e.op == "^":
            return f"_pow({lhs}, {rhs})"
        return f"({lhs} {e.op} {rhs})"
    return f"_f_{e.fn}({', '.join(python_source(a, names, constants) for a in e.args)})"


def build_function(source: str, label: str = "<expr>") -> Callable:
    """Compile generated ``def`` source in the checked-arithmetic namespace."""
    ns = dict(_NAMESPACE, _isfinite=math.isfinite, _DomainError=DomainError)
    exec(compile(source, label, "exec"), ns)
    return ns["_generated"]


def compile_expr(
    e: Expression,
    arg_names: Sequence[str],
    constants: Mapping[str, float] | None = None,
    vector: bool = False,
) -> Callable[..., float]:
    """Turn ``e`` into a function taking positional arguments named ``arg_names``.

    Names found in ``constants`` are folded in; any other free variable raises
    :class:`UnboundVariableError` immediately. With ``vector=True`` the result
    accepts numpy arrays and broadcasts.
    """
    constants = dict(constants or {})
    if not vector:
        names = {name: f"a{i}" for i, name in enumerate(arg_names)}
        body = python_source(e, names, constants)
        params = ", ".join(names.values())
        src = (
            f"def _generated({params}):\n"
            f"    out = {body}\n"
            f"    if not _isfinite(out):\n"
            f"        raise _DomainError('non-finite result', out)\n"
            f"    return out\n"
        )
        return build_function(src, to_source(e))

    index = {name: i for i, name in enumerate(arg_names)}

    def build(node: Expression):
        if isinstance(node, Number):
            v = node.value
            return lambda args: v
        if isinstance(node, Var):
            if node.name in index:
                i = index[node.name]
                return lambda args: args[i]
            if node.name in constants:
                v = float(constants[node.name])
                return lambda args: v
            raise UnboundVariableError(node.name)
        if isinstance(node, Unary):
            inner = build(node.arg)
            return lambda args: -inner(args)
        if isinstance(node, Binary):
            lhs, rhs, op = build(node.lhs), build(node.rhs), _VECTOR_OPS[node.op]
            return lambda args: op(lhs(args), rhs(args))
        fn = _VECTOR_FUNCS[node.fn]
        parts = [build(a) for a in node.args]
        return lambda args: fn(*(p(args) for p in parts))

    body_fn = build(e)

    def run(*args):
        out = body_fn(args)
        if not np.all(np.isfinite(out)):
            raise DomainError("non-finite result", "vector")
        return out

    return run


# -- printing ------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3
_ATOM_PREC = 5


def _prec(e: Expression) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _UNARY_PREC
    if isinstance(e, Number) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return _UNARY_PREC
    return _ATOM_PREC


def to_source(e: Expression) -> str:
    """Render ``e`` with the minimum parentheses needed to parse back to ``e``."""
    if isinstance(e, Number):
        if e.value == math.pi:
            return "pi"
        if e.value == math.e:
            return "e"
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(to_source(a) for a in e.args)})"
    if isinstance(e, Unary):
        inner = to_source(e.arg)
        if _prec(e.arg) < _UNARY_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[e.op]
    lhs, rhs = to_source(e.lhs), to_source(e.rhs)
    if e.op == "^":
        if _prec(e.lhs) <= p:
            lhs = f"({lhs})"
        if _prec(e.rhs) < _UNARY_PREC:
            rhs = f"({rhs})"
    else:
        if _prec(e.lhs) < p:
            lhs = f"({lhs})"
        if _prec(e.rhs) <= p and _prec(e.rhs) != _UNARY_PREC:
            rhs = f"({rhs})"
    return f"{lhs}{e.op}{rhs}"
