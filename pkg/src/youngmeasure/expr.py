"""Single-variable real expressions: parsing, rendering, evaluation and
symbolic differentiation.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := ("-")? power
    power  := atom ("^" integer)?
    atom   := number | "x" | "y" | "pi" | func "(" expr ")" | "(" expr ")"
    func   := "sin" | "cos" | "exp" | "ln" | "sqrt" | "abs"

The variable may be spelled ``x`` or ``y`` (test functions on the value
axis read more naturally in ``y``), but one expression uses only one of
them.  Constants are held as exact fractions.  A division of two constants
and a negated constant are folded while parsing, so ``2/3`` and ``-1/4``
become single constant nodes.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Union

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")
VARIABLES = ("x", "y")


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name, offset):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset)


class ExprDomainError(ExprError):
    """Raised when an expression is evaluated outside its domain."""

    def __init__(self, message, node):
        self.node = node
        super().__init__(f"{message} in {render(node)!r}")


# -- nodes -------------------------------------------------------------------


class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    def __str__(self):
        return render(self)

    @cached_property
    def has_var(self) -> bool:
        return any(c.has_var for c in self.children())

    def children(self):
        return ()


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction
    fval: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = Fraction(self.value)
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "fval", float(v))

    @cached_property
    def has_var(self):
        return False


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str = "x"

    @cached_property
    def has_var(self):
        return True


@dataclass(frozen=True, eq=True)
class Pi(Expr):
    @cached_property
    def has_var(self):
        return False


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def children(self):
        return (self.base,)


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str
    arg: Expr

    def children(self):
        return (self.arg,)


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


# -- simplifying constructors used by differentiate / substitute ---------------


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def add(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(b) and b.value < 0:
        return Sub(a, Const(-b.value))
    return Add(a, b)


def sub(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    return Sub(a, b)


def mul(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return Const(0)
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return Mul(a, b)


def div(a, b):
    if _is_const(b, 0):
        raise ExprDomainError("division by zero", Div(a, b))
    if _is_const(a) and _is_const(b):
        return Const(a.value / b.value)
    if _is_const(a, 0):
        return Const(0)
    if _is_const(b, 1):
        return a
    return Div(a, b)


def neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(base, n):
    if n == 0:
        return Const(1)
    if n == 1:
        return base
    if _is_const(base) and n > 0:
        return Const(base.value**n)
    return Pow(base, n)


# -- tokenizer and parser ----------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)

_ATOM_START = frozenset({"number", "x", "y", "pi", "(", "-", *FUNCTIONS})


@dataclass
class _Tok:
    kind: str  # num, name, op, end
    text: str
    offset: int


def _tokenize(source):
    toks = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {source[pos]!r}", _byte_offset(source, pos)
            )
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    toks.append(_Tok("end", "", _byte_offset(source, len(source))))
    return toks


def _byte_offset(source, index):
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source):
        self.toks = _tokenize(source)
        self.i = 0
        self.var_names = set()

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {what}", t.offset, expected)

    def expect_op(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        self.fail({text})

    def parse(self):
        e = self.expr()
        if self.tok.kind != "end":
            self.fail({"+", "-", "*", "/", "^", "end of input"})
        if len(self.var_names) > 1:
            raise ExprSyntaxError(
                "expression mixes variables " + " and ".join(sorted(self.var_names)), 0
            )
        return e

    def expr(self):
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op_tok = self.advance()
            rhs = self.factor()
            if op_tok.text == "/" and _is_const(e) and _is_const(rhs):
                if rhs.value == 0:
                    raise ExprSyntaxError("constant division by zero", op_tok.offset)
                e = Const(e.value / rhs.value)
            else:
                e = BinOp(op_tok.text, e, rhs)
        return e

    def factor(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            arg = self.power()
            return Const(-arg.value) if _is_const(arg) else Neg(arg)
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                sign = -1
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                self.fail({"integer"})
            self.advance()
            return Pow(base, sign * int(t.text))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Const(Fraction(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in VARIABLES:
                self.var_names.add(t.text)
                return Var(t.text)
            if t.text == "pi":
                return Pi()
            if t.text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(t.text, arg)
            raise UnknownIdentifierError(t.text, t.offset)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect_op(")")
            return e
        self.fail(_ATOM_START)


def parse(source: str) -> Expr:
    """Parse `source` into an expression tree."""
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0, _ATOM_START)
    return _Parser(source).parse()


def as_expr(e: Union[Expr, str]) -> Expr:
    return parse(e) if isinstance(e, str) else e


# -- rendering ---------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _const_text(v: Fraction):
    if v.denominator == 1:
        return str(v.numerator), (_PREC_ATOM if v >= 0 else _PREC_NEG)
    return f"{v.numerator}/{v.denominator}", _PREC_MUL


def _render(e):
    """Return (text, precedence) for `e`."""
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return e.name, _PREC_ATOM
    if isinstance(e, Pi):
        return "pi", _PREC_ATOM
    if isinstance(e, Call):
        return f"{e.func}({_render(e.arg)[0]})", _PREC_ATOM
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _PREC_POW), _PREC_NEG
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC_ATOM)}^{e.exponent}", _PREC_POW
    if isinstance(e, BinOp):
        if e.op in "+-":
            text = f"{_wrap(e.left, _PREC_ADD)} {e.op} {_wrap(e.right, _PREC_MUL)}"
            return text, _PREC_ADD
        return f"{_wrap(e.left, _PREC_MUL)}{e.op}{_wrap(e.right, _PREC_NEG)}", _PREC_MUL
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e, min_prec):
    text, prec = _render(e)
    return text if prec >= min_prec else f"({text})"


def render(e: Expr) -> str:
    """Infix text that parses back to the same tree."""
    return _render(e)[0]


# -- evaluation --------------------------------------------------------------


def _ev(e, x):
    if isinstance(e, Const):
        return e.fval
    if isinstance(e, Var):
        return x
    if isinstance(e, Pi):
        return math.pi
    if isinstance(e, Neg):
        return -_ev(e.arg, x)
    if isinstance(e, BinOp):
        a = _ev(e.left, x)
        b = _ev(e.right, x)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if np.any(b == 0):
            raise ExprDomainError("division by zero", e)
        return a / b
    if isinstance(e, Pow):
        b = _ev(e.base, x)
        if e.exponent < 0:
            if np.any(b == 0):
                raise ExprDomainError("division by zero", e)
            return 1.0 / b ** (-e.exponent)
        return b**e.exponent
    if isinstance(e, Call):
        a = _ev(e.arg, x)
        f = e.func
        if f == "sin":
            return np.sin(a)
        if f == "cos":
            return np.cos(a)
        if f == "exp":
            return np.exp(a)
        if f == "ln":
            if np.any(a <= 0):
                raise ExprDomainError("logarithm of a nonpositive value", e)
            return np.log(a)
        if f == "sqrt":
            if np.any(a < 0):
                raise ExprDomainError("square root of a negative value", e)
            return np.sqrt(a)
        if f == "abs":
            return np.abs(a)
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, x):
    """Evaluate `e` at `x` (a float or a numpy array of floats).

    Domain violations raise :class:`ExprDomainError`; a non-finite result
    (overflow) is reported the same way.
    """
    if isinstance(x, np.ndarray):
        xv = x.astype(float, copy=False)
        with np.errstate(over="ignore", invalid="ignore"):
            out = _ev(e, xv)
        out = np.broadcast_to(np.asarray(out, dtype=float), xv.shape)
        if not np.all(np.isfinite(out)):
            raise ExprDomainError("non-finite value", e)
        return out
    with np.errstate(over="ignore", invalid="ignore"):
        out = float(_ev(e, np.float64(x)))
    if not math.isfinite(out):
        raise ExprDomainError("non-finite value", e)
    return out


# -- differentiation and substitution -----------------------------------------


def differentiate(e: Expr) -> Expr:
    """Symbolic derivative with respect to the variable."""
    if not e.has_var:
        return Const(0)
    if isinstance(e, Var):
        return Const(1)
    if isinstance(e, Neg):
        return neg(differentiate(e.arg))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        da, db = differentiate(a), differentiate(b)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, b), mul(a, db))
        if not b.has_var:
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    if isinstance(e, Pow):
        n = e.exponent
        return mul(mul(Const(n), power(e.base, n - 1)), differentiate(e.base))
    if isinstance(e, Call):
        g = e.arg
        dg = differentiate(g)
        f = e.func
        if f == "sin":
            return mul(dg, Call("cos", g))
        if f == "cos":
            return neg(mul(dg, Call("sin", g)))
        if f == "exp":
            return mul(dg, e)
        if f == "ln":
            return div(dg, g)
        if f == "sqrt":
            return div(dg, mul(Const(2), e))
        if f == "abs":
            # g/|g| is the sign of g; undefined (division by zero) at g = 0
            return mul(dg, Div(g, e))
    raise TypeError(f"not an expression node: {e!r}")


def substitute(e: Expr, replacement: Expr) -> Expr:
    """Replace every occurrence of the variable in `e` by `replacement`."""
    if not e.has_var:
        return e
    if isinstance(e, Var):
        return replacement
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, replacement))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, replacement), substitute(e.right, replacement))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, replacement), e.exponent)
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, replacement))
    raise TypeError(f"not an expression node: {e!r}")


def affine(scale, shift, name="x") -> Expr:
    """The expression ``scale*x + shift`` with trivial parts dropped."""
    return add(mul(Const(scale), Var(name)), Const(shift))


def _source(e):
    if isinstance(e, Const):
        return repr(e.fval)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Pi):
        return repr(math.pi)
    if isinstance(e, Neg):
        return f"(-{_source(e.arg)})"
    if isinstance(e, BinOp):
        return f"({_source(e.left)} {e.op} {_source(e.right)})"
    if isinstance(e, Pow):
        if e.exponent < 0:
            return f"(1.0 / {_source(e.base)} ** {-e.exponent})"
        return f"({_source(e.base)} ** {e.exponent})"
    if isinstance(e, Call):
        name = "log" if e.func == "ln" else e.func
        return f"_np.{name}({_source(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def lambdify(e: Expr):
    """Compile `e` to a plain numpy function of one argument.

    No domain checks are made; meant for hot loops over points already
    known to lie in the domain.
    """
    code = compile(f"lambda x: {_source(e)}", "<expr>", "eval")
    return eval(code, {"_np": np})
