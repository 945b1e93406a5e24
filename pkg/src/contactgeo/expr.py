"""Small symbolic expression core: parsing, exact differentiation, evaluation.

Every scalar quantity in this package (contact form components, Hamiltonians,
metric entries, thermodynamic potentials) is an immutable ``Expr`` tree, so
that all derivatives needed downstream -- up to the third derivatives that
curvature requires -- are exact.

Grammar accepted by :func:`parse`::

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := base ('^' exponent)?
    base     := number | ident | func '(' expr ')' | '(' expr ')' | '-' base
    exponent := signed number | '(' signed rational ')'     e.g.  2, -2, 0.5, (-2/3)
    func     := 'exp' | 'log' | 'sin' | 'cos'

Identifiers are ``[A-Za-z][A-Za-z0-9_]*``.  Exponents are stored as exact
``fractions.Fraction`` values so that e.g. ``V^(-2/3)`` differentiates cleanly.
Only light simplification is performed at construction time (constant folding
and 0/1 identities); correctness elsewhere is checked by evaluation, not by
tree equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "Expr",
    "ExprError",
    "ParseError",
    "EvalError",
    "const",
    "var",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "power",
    "exp",
    "log",
    "sin",
    "cos",
    "parse",
    "differentiate",
    "evaluate",
    "to_string",
    "free_variables",
]

_FUNCTIONS = ("exp", "log", "sin", "cos")


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError):
    """Syntax error; ``position`` is the 0-based offset into the input."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.message = message
        self.position = position


class EvalError(ExprError):
    """Raised for unbound variables and arithmetic domain errors."""


@dataclass(frozen=True, slots=True)
class Expr:
    """Immutable expression node.

    ``kind`` is one of ``const, var, add, sub, mul, div, pow, neg, exp, log,
    sin, cos``.  ``value`` is used for constants, ``name`` for variables and
    ``exponent`` (an exact rational) for ``pow`` nodes.
    """

    kind: str
    args: tuple["Expr", ...] = ()
    value: float = 0.0
    name: str = ""
    exponent: Fraction | None = None

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def diff(self, name: str) -> "Expr":
        return differentiate(self, name)

    def __str__(self) -> str:
        return to_string(self)

    def __repr__(self) -> str:
        return f"<Expr {to_string(self)}>"


def _lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, Fraction)):
        return const(float(x))
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


ZERO = Expr("const", value=0.0)
ONE = Expr("const", value=1.0)


def const(value: float) -> Expr:
    value = float(value)
    if value == 0.0:
        return ZERO
    if value == 1.0:
        return ONE
    return Expr("const", value=value)


def var(name: str) -> Expr:
    return Expr("var", name=name)


def _is_const(e: Expr, v: float | None = None) -> bool:
    return e.kind == "const" and (v is None or e.value == v)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        s = a.value + b.value
        if math.isfinite(s):
            return const(s)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Expr("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        s = a.value - b.value
        if math.isfinite(s):
            return const(s)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if a == b:
        return ZERO
    return Expr("sub", (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        s = a.value * b.value
        if math.isfinite(s):
            return const(s)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    # keep constants in front and collapse nested constant factors
    if _is_const(b) and not _is_const(a):
        a, b = b, a
    if _is_const(a) and b.kind == "mul" and _is_const(b.args[0]):
        s = a.value * b.args[0].value
        if math.isfinite(s):
            return mul(const(s), b.args[1])
    return Expr("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        s = a.value / b.value
        if math.isfinite(s):
            return const(s)
    return Expr("div", (a, b))


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return const(-a.value)
    if a.kind == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def power(base: Expr, exponent) -> Expr:
    r = exponent if isinstance(exponent, Fraction) else Fraction(exponent)
    if r == 0:
        return ONE
    if r == 1:
        return base
    if _is_const(base):
        try:
            v = _pow_value(base.value, r)
        except (EvalError, OverflowError):
            v = None
        if v is not None and math.isfinite(v):
            return const(v)
    return Expr("pow", (base,), exponent=r)


def exp(a: Expr) -> Expr:
    return Expr("exp", (a,))


def log(a: Expr) -> Expr:
    return Expr("log", (a,))


def sin(a: Expr) -> Expr:
    return Expr("sin", (a,))


def cos(a: Expr) -> Expr:
    return Expr("cos", (a,))


# ---------------------------------------------------------------------------
# differentiation

@lru_cache(maxsize=None)
def free_variables(e: Expr) -> frozenset[str]:
    if e.kind == "var":
        return frozenset((e.name,))
    if e.kind == "const":
        return frozenset()
    out: frozenset[str] = frozenset()
    for a in e.args:
        out |= free_variables(a)
    return out


@lru_cache(maxsize=None)
def differentiate(e: Expr, name: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to variable ``name``."""
    if name not in free_variables(e):
        return ZERO
    k = e.kind
    if k == "var":
        return ONE
    if k == "add":
        return add(differentiate(e.args[0], name), differentiate(e.args[1], name))
    if k == "sub":
        return sub(differentiate(e.args[0], name), differentiate(e.args[1], name))
    if k == "mul":
        a, b = e.args
        return add(mul(differentiate(a, name), b), mul(a, differentiate(b, name)))
    if k == "div":
        a, b = e.args
        num = sub(mul(differentiate(a, name), b), mul(a, differentiate(b, name)))
        return div(num, mul(b, b))
    if k == "neg":
        return neg(differentiate(e.args[0], name))
    if k == "pow":
        a = e.args[0]
        r = e.exponent
        scale = mul(const(float(r)), power(a, r - 1))
        return mul(scale, differentiate(a, name))
    if k == "exp":
        return mul(e, differentiate(e.args[0], name))
    if k == "log":
        return div(differentiate(e.args[0], name), e.args[0])
    if k == "sin":
        return mul(cos(e.args[0]), differentiate(e.args[0], name))
    if k == "cos":
        return neg(mul(sin(e.args[0]), differentiate(e.args[0], name)))
    raise AssertionError(f"unknown node kind {k!r}")


# ---------------------------------------------------------------------------
# evaluation

def _pow_value(base: float, r: Fraction) -> float:
    if base == 0.0:
        if r < 0:
            raise EvalError("zero raised to a negative power")
        return 0.0
    if base < 0.0:
        if r.denominator == 1:
            return math.pow(base, r.numerator)
        if r.denominator % 2 == 1:
            # odd root of a negative number is real
            mag = math.pow(-base, r.numerator / r.denominator)
            return -mag if r.numerator % 2 == 1 else mag
        raise EvalError("negative base with even-root exponent")
    return math.pow(base, r.numerator / r.denominator)


def evaluate(e: Expr, bindings) -> float:
    """IEEE-double evaluation of the tree with all free variables bound."""
    return _eval(e, bindings, {})


def _eval(e: Expr, b, memo: dict) -> float:
    # keyed by id; the stored node reference keeps the id from being recycled
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    k = e.kind
    if k == "const":
        v = e.value
    elif k == "var":
        try:
            v = b[e.name]
        except KeyError:
            raise EvalError(f"unbound variable '{e.name}'") from None
    elif k == "add":
        v = _eval(e.args[0], b, memo) + _eval(e.args[1], b, memo)
    elif k == "sub":
        v = _eval(e.args[0], b, memo) - _eval(e.args[1], b, memo)
    elif k == "mul":
        v = _eval(e.args[0], b, memo) * _eval(e.args[1], b, memo)
    elif k == "div":
        den = _eval(e.args[1], b, memo)
        if den == 0.0:
            raise EvalError("division by zero")
        v = _eval(e.args[0], b, memo) / den
    elif k == "neg":
        v = -_eval(e.args[0], b, memo)
    elif k == "pow":
        v = _pow_value(_eval(e.args[0], b, memo), e.exponent)
    elif k == "exp":
        v = math.exp(_eval(e.args[0], b, memo))
    elif k == "log":
        arg = _eval(e.args[0], b, memo)
        if arg <= 0.0:
            raise EvalError("log of a non-positive value")
        v = math.log(arg)
    elif k == "sin":
        v = math.sin(_eval(e.args[0], b, memo))
    elif k == "cos":
        v = math.cos(_eval(e.args[0], b, memo))
    else:
        raise AssertionError(f"unknown node kind {k!r}")
    memo[key] = (e, v)
    return v


# ---------------------------------------------------------------------------
# parsing

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, position: int | None = None):
        raise ParseError(message, self.pos if position is None else position)

    def skip_ws(self):
        t = self.text
        while self.pos < len(t) and t[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> Expr:
        e = self.parse_expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error(f"unexpected character {self.text[self.pos]!r}")
        return e

    def parse_expr(self) -> Expr:
        e = self.parse_term()
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                e = add(e, self.parse_term())
            elif c == "-":
                self.pos += 1
                e = sub(e, self.parse_term())
            else:
                return e

    def parse_term(self) -> Expr:
        e = self.parse_factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                e = mul(e, self.parse_factor())
            elif c == "/":
                self.pos += 1
                e = div(e, self.parse_factor())
            else:
                return e

    def parse_factor(self) -> Expr:
        e = self.parse_base()
        if self.peek() == "^":
            self.pos += 1
            e = power(e, self.parse_exponent())
        return e

    def parse_base(self) -> Expr:
        c = self.peek()
        if c == "":
            self.error("unexpected end of input")
        if c == "-":
            self.pos += 1
            return neg(self.parse_base())
        if c == "(":
            open_pos = self.pos
            self.pos += 1
            e = self.parse_group_body(open_pos)
            return e
        if c.isdigit() or c == ".":
            return const(self.parse_number())
        if c.isalpha():
            start = self.pos
            name = self.parse_ident()
            if self.peek() == "(":
                if name not in _FUNCTIONS:
                    self.error(f"unknown function '{name}'", start)
                open_pos = self.pos
                self.pos += 1
                arg = self.parse_group_body(open_pos)
                return Expr(name, (arg,))
            return var(name)
        self.error(f"unexpected character {c!r}")

    def parse_group_body(self, open_pos: int) -> Expr:
        # errors hitting end-of-input inside a group are blamed on the '('
        try:
            e = self.parse_expr()
            self.skip_ws()
            if self.pos >= len(self.text):
                raise ParseError("unbalanced '('", open_pos)
            if self.text[self.pos] != ")":
                self.error(f"expected ')' but found {self.text[self.pos]!r}")
            self.pos += 1
            return e
        except ParseError as err:
            if err.position >= len(self.text):
                raise ParseError("unbalanced '('", open_pos) from None
            raise

    def parse_number(self) -> float:
        t = self.text
        start = self.pos
        while self.pos < len(t) and t[self.pos].isdigit():
            self.pos += 1
        if self.pos < len(t) and t[self.pos] == ".":
            self.pos += 1
            while self.pos < len(t) and t[self.pos].isdigit():
                self.pos += 1
        if self.pos == start or t[start:self.pos] == ".":
            self.error("expected a number", start)
        if self.pos < len(t) and t[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(t) and t[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(t) and t[self.pos].isdigit():
                while self.pos < len(t) and t[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark  # not scientific notation; 'e...' starts the next token
        return float(t[start:self.pos])

    def parse_ident(self) -> str:
        t = self.text
        start = self.pos
        self.pos += 1
        while self.pos < len(t) and (t[self.pos].isalnum() or t[self.pos] == "_"):
            self.pos += 1
        return t[start:self.pos]

    def parse_exponent(self) -> Fraction:
        self.skip_ws()
        if self.peek() == "(":
            open_pos = self.pos
            self.pos += 1
            r = self.parse_signed_rational(allow_slash=True)
            self.skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != ")":
                self.error("unbalanced '(' in exponent", open_pos)
            self.pos += 1
            return r
        return self.parse_signed_rational(allow_slash=False)

    def parse_signed_rational(self, allow_slash: bool) -> Fraction:
        self.skip_ws()
        sign = 1
        if self.peek() in "+-":
            if self.text[self.pos] == "-":
                sign = -1
            self.pos += 1
        start = self.pos
        num = self.parse_number()
        if allow_slash and self.peek() == "/":
            self.pos += 1
            den = self.parse_number()
            if den == 0:
                self.error("zero denominator in exponent", start)
            if num != int(num) or den != int(den):
                self.error("rational exponent must use integers", start)
            return Fraction(sign * int(num), int(den))
        return sign * Fraction(num).limit_denominator(10**12) if num != int(num) else Fraction(sign * int(num))


def parse(text: str) -> Expr:
    """Parse ``text`` into an :class:`Expr`; raises :class:`ParseError` on bad input."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing

# precedence slots of the grammar: expr(0) < term(1) < factor(2) < base(3)
_LEVEL = {
    "add": 0, "sub": 0,
    "mul": 1, "div": 1,
    "pow": 2,
    "const": 3, "var": 3, "neg": 3, "exp": 3, "log": 3, "sin": 3, "cos": 3,
}


def _num_str(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _exp_str(r: Fraction) -> str:
    if r.denominator == 1:
        return str(r.numerator)
    return f"({r.numerator}/{r.denominator})"


def _pr(e: Expr, need: int) -> str:
    s = _render(e)
    if _LEVEL[e.kind] < need:
        return f"({s})"
    return s


def _render(e: Expr) -> str:
    k = e.kind
    if k == "const":
        return _num_str(e.value)
    if k == "var":
        return e.name
    if k == "add":
        return f"{_pr(e.args[0], 0)} + {_pr(e.args[1], 1)}"
    if k == "sub":
        return f"{_pr(e.args[0], 0)} - {_pr(e.args[1], 1)}"
    if k == "mul":
        return f"{_pr(e.args[0], 1)}*{_pr(e.args[1], 2)}"
    if k == "div":
        return f"{_pr(e.args[0], 1)}/{_pr(e.args[1], 2)}"
    if k == "pow":
        return f"{_pr(e.args[0], 3)}^{_exp_str(e.exponent)}"
    if k == "neg":
        return f"-{_pr(e.args[0], 3)}"
    return f"{k}({_render(e.args[0])})"


def to_string(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_string(e))`` rebuilds the identical tree."""
    return _render(e)
