"""Small arithmetic expression language for coefficient fields a_k(x, y).

Grammar (ASCII): real literals, the symbols x and y, the constant pi,
unary minus, cos and sin, binary + - *, and division by a numeric literal
(so rational scalings like 1/4 stay total on the whole domain).  Standard
precedence; parentheses group.

The AST is a tree of frozen dataclasses with structural equality, and
``parse(to_source(e)) == e`` holds for every tree the printer can see.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "ExpressionError",
    "Expr",
    "Num",
    "Var",
    "Pi",
    "Neg",
    "Cos",
    "Sin",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "parse",
    "to_source",
    "evaluate",
    "diff",
    "constant_value",
]


class ExpressionError(ConfigError):
    """Syntax or unknown-symbol error; ``pos`` is the 0-based offset."""

    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} (position {pos})")


class Expr:
    """Base class; concrete nodes below."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str  # "x" or "y"


@dataclass(frozen=True)
class Pi(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Cos(Expr):
    operand: Expr


@dataclass(frozen=True)
class Sin(Expr):
    operand: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Num  # numeric literal only, keeps evaluation total


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/()])
    )""",
    re.VERBOSE,
)

_KNOWN_IDENTS = {"x", "y", "pi", "cos", "sin"}


def _tokenize(src: str):
    pos = 0
    out = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            # only whitespace left is fine; anything else is a bad char
            rest = src[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ExpressionError(f"unexpected character {src[bad]!r}", bad)
        if m.group("num") is not None:
            out.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            name = m.group("ident")
            if name not in _KNOWN_IDENTS:
                raise ExpressionError(f"unknown symbol {name!r}", m.start("ident"))
            out.append(("ident", name, m.start("ident")))
        else:
            out.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}", pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"trailing input {val!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                e = Add(e, rhs) if val == "+" else Sub(e, rhs)
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val == "*":
                self.next()
                e = Mul(e, self.factor())
            elif kind == "op" and val == "/":
                self.next()
                nkind, nval, npos = self.peek()
                if nkind != "num":
                    raise ExpressionError("denominator must be a numeric literal", npos)
                self.next()
                d = float(nval)
                if d == 0.0:
                    raise ExpressionError("division by zero literal", npos)
                e = Div(e, Num(d))
            else:
                return e

    def factor(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return Neg(self.factor())
        return self.atom()

    def atom(self) -> Expr:
        kind, val, pos = self.next()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val in ("x", "y"):
                return Var(val)
            if val == "pi":
                return Pi()
            # cos or sin
            self.expect_op("(")
            inner = self.expr()
            self.expect_op(")")
            return Cos(inner) if val == "cos" else Sin(inner)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ExpressionError(f"expected a value, got {val!r}" if val else "unexpected end of input", pos)


def parse(src: str) -> Expr:
    """Parse a coefficient expression; raises ExpressionError with position."""
    if not isinstance(src, str) or src.strip() == "":
        raise ExpressionError("empty expression", 0)
    return _Parser(src).parse()


# precedence levels for the printer: additive 1, multiplicative 2, unary 3
def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return 1
    if isinstance(e, (Mul, Div)):
        return 2
    if isinstance(e, Neg):
        return 3
    return 9


def _src(e: Expr, parent: int, right_side: bool) -> str:
    p = _prec(e)
    if isinstance(e, Num):
        s = repr(e.value)
    elif isinstance(e, Var):
        s = e.name
    elif isinstance(e, Pi):
        s = "pi"
    elif isinstance(e, Neg):
        inner = _src(e.operand, 0, False)
        if _prec(e.operand) <= 2 or isinstance(e.operand, Neg):
            inner = f"({inner})"
        s = f"-{inner}"
    elif isinstance(e, Cos):
        s = f"cos({_src(e.operand, 0, False)})"
    elif isinstance(e, Sin):
        s = f"sin({_src(e.operand, 0, False)})"
    elif isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        s = f"{_src(e.left, p, False)} {op} {_src(e.right, p, True)}"
    elif isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        s = f"{_src(e.left, p, False)} {op} {_src(e.right, p, True)}"
    else:
        raise TypeError(f"not an expression node: {e!r}")
    if p < parent or (p == parent and right_side and isinstance(e, (Add, Sub, Mul, Div))):
        s = f"({s})"
    return s


def to_source(e: Expr) -> str:
    """Render the tree to source the parser maps back to the same tree."""
    return _src(e, 0, False)


def evaluate(e: Expr, x, y):
    """Evaluate at (x, y); broadcasts over array arguments.

    Returns a float for scalar inputs, an array of the broadcast shape
    otherwise.  Total on all of R^2 by construction of the grammar.
    """
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    v = _ev(e, xv, yv)
    shape = np.broadcast_shapes(xv.shape, yv.shape)
    if shape == ():
        return float(v)
    if np.shape(v) != shape:
        v = np.broadcast_to(np.asarray(v, dtype=float), shape).copy()
    return v


def _ev(e: Expr, x, y):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x if e.name == "x" else y
    if isinstance(e, Pi):
        return np.pi
    if isinstance(e, Neg):
        return -_ev(e.operand, x, y)
    if isinstance(e, Cos):
        return np.cos(_ev(e.operand, x, y))
    if isinstance(e, Sin):
        return np.sin(_ev(e.operand, x, y))
    if isinstance(e, Add):
        return _ev(e.left, x, y) + _ev(e.right, x, y)
    if isinstance(e, Sub):
        return _ev(e.left, x, y) - _ev(e.right, x, y)
    if isinstance(e, Mul):
        return _ev(e.left, x, y) * _ev(e.right, x, y)
    if isinstance(e, Div):
        return _ev(e.left, x, y) / e.right.value
    raise TypeError(f"not an expression node: {e!r}")


def _fold(e: Expr) -> Expr:
    """Light constant folding: drop exact zero/one factors and summands."""
    if isinstance(e, Neg):
        o = _fold(e.operand)
        if isinstance(o, Num):
            return Num(-o.value)
        return Neg(o)
    if isinstance(e, (Cos, Sin)):
        return type(e)(_fold(e.operand))
    if isinstance(e, (Add, Sub, Mul, Div)):
        l = _fold(e.left)
        r = _fold(e.right) if not isinstance(e, Div) else e.right
        if isinstance(e, Add):
            if isinstance(l, Num) and l.value == 0.0:
                return r
            if isinstance(r, Num) and r.value == 0.0:
                return l
            if isinstance(l, Num) and isinstance(r, Num):
                return Num(l.value + r.value)
            return Add(l, r)
        if isinstance(e, Sub):
            if isinstance(r, Num) and r.value == 0.0:
                return l
            if isinstance(l, Num) and l.value == 0.0:
                return Num(-r.value) if isinstance(r, Num) else Neg(r)
            if isinstance(l, Num) and isinstance(r, Num):
                return Num(l.value - r.value)
            return Sub(l, r)
        if isinstance(e, Mul):
            if (isinstance(l, Num) and l.value == 0.0) or (
                isinstance(r, Num) and r.value == 0.0
            ):
                return Num(0.0)
            if isinstance(l, Num) and l.value == 1.0:
                return r
            if isinstance(r, Num) and r.value == 1.0:
                return l
            if isinstance(l, Num) and isinstance(r, Num):
                return Num(l.value * r.value)
            return Mul(l, r)
        # Div
        if isinstance(l, Num):
            return Num(l.value / r.value)
        if r.value == 1.0:
            return l
        return Div(l, r)
    return e


def diff(e: Expr, var: str) -> Expr:
    """Exact partial derivative with respect to "x" or "y", lightly folded."""
    if var not in ("x", "y"):
        raise ValueError(f"var must be 'x' or 'y', got {var!r}")
    return _fold(_diff(e, var))


def _diff(e: Expr, var: str) -> Expr:
    if isinstance(e, (Num, Pi)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == var else 0.0)
    if isinstance(e, Neg):
        return Neg(_diff(e.operand, var))
    if isinstance(e, Cos):
        return Neg(Mul(Sin(e.operand), _diff(e.operand, var)))
    if isinstance(e, Sin):
        return Mul(Cos(e.operand), _diff(e.operand, var))
    if isinstance(e, Add):
        return Add(_diff(e.left, var), _diff(e.right, var))
    if isinstance(e, Sub):
        return Sub(_diff(e.left, var), _diff(e.right, var))
    if isinstance(e, Mul):
        return Add(Mul(_diff(e.left, var), e.right), Mul(e.left, _diff(e.right, var)))
    if isinstance(e, Div):
        return Div(_diff(e.left, var), e.right)
    raise TypeError(f"not an expression node: {e!r}")


def constant_value(e: Expr) -> float | None:
    """The expression's value if it contains no x or y, else None."""
    if _has_var(e):
        return None
    return float(evaluate(e, 0.0, 0.0))


def _has_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, (Num, Pi)):
        return False
    if isinstance(e, (Neg, Cos, Sin)):
        return _has_var(e.operand)
    return _has_var(e.left) or _has_var(e.right)
