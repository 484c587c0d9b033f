"""Parser, evaluator and symbolic differentiator for metric-component formulas.

Formulas are written over the time variable ``t`` and spatial variables
``x1 .. xn``.  The grammar (see README) supports ``+ - * / ^``, unary minus,
the functions ``sin cos exp log sqrt abs sign`` and the constants ``pi`` and
``e``.  Precedence is ``^`` over unary minus over ``* /`` over ``+ -``, with
``^`` right-associative, so ``-t^2`` means ``-(t^2)`` and ``2^-t`` is valid.

ASTs are immutable; evaluation accepts scalars or numpy arrays and is pure.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "ParseError",
    "EvaluationError",
    "parse",
    "evaluate",
    "differentiate",
    "to_source",
    "variables",
]

_FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs", "sign")
_CONSTANTS = {"pi": math.pi, "e": math.e}


class ParseError(ValueError):
    """Malformed formula; ``offset`` is the byte position of the failure."""

    def __init__(self, offset: int, message: str, expected: str | None = None):
        self.offset = offset
        self.message = message
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"offset {offset}: {message}{hint}")


class EvaluationError(ArithmeticError):
    """Evaluation produced a non-finite value in the named subexpression."""

    def __init__(self, node: "Expr", detail: str = "non-finite result"):
        self.node = node
        super().__init__(f"{detail} in '{to_source(node)}'")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "t" or "x<k>" with k >= 1


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    lhs: "Expr"
    rhs: "Expr"


Expr = Union[Const, Var, Unary, Binary]


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(pos, f"unexpected character {source[pos]!r}")
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(source)))
    return tokens


# ---------------------------------------------------------------------------
# Recursive-descent parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, n: int):
        self.tokens = _tokenize(source)
        self.n = n
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, pos = self.peek()
        if kind == "op" and text == op:
            return self.advance()
        raise ParseError(pos, f"found {text or 'end of input'!r}", expected=repr(op))

    # expr := term (('+'|'-') term)*
    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = Binary(text, node, self.term())
            else:
                return node

    # term := unary (('*'|'/') unary)*
    def term(self) -> Expr:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = Binary(text, node, self.unary())
            else:
                return node

    # unary := '-' unary | power      (so '^' binds tighter than unary minus)
    def unary(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Unary("neg", self.unary())
        return self.power()

    # power := base ('^' unary)?      (right-associative, allows 2^-t)
    def power(self) -> Expr:
        node = self.base()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return Binary("^", node, self.unary())
        return node

    # base := number | ident | ident '(' expr ')' | '(' expr ')'
    def base(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "number":
            return Const(float(text))
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            if text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Unary(text, arg)
            if text in _CONSTANTS:
                return Const(_CONSTANTS[text])
            if text == "t":
                return Var("t")
            m = re.fullmatch(r"x(\d+)", text)
            if m:
                k = int(m.group(1))
                if not 1 <= k <= self.n:
                    raise ParseError(
                        pos,
                        f"variable {text} out of range for spatial dimension {self.n}",
                        expected=f"x1..x{self.n}" if self.n >= 1 else "t",
                    )
                return Var(text)
            raise ParseError(pos, f"unknown identifier {text!r}")
        raise ParseError(pos, f"found {text or 'end of input'!r}", expected="a value")


def parse(source: str, n: int) -> Expr:
    """Parse ``source`` into an AST over t, x1..xn.

    Raises ParseError (with byte offset) on malformed input or on a spatial
    variable index exceeding ``n``.
    """
    if n < 0:
        raise ValueError("spatial dimension must be >= 0")
    p = _Parser(source, n)
    node = p.expr()
    kind, text, pos = p.peek()
    if kind != "eof":
        raise ParseError(pos, f"trailing input {text!r}", expected="end of input")
    return node


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

_UNARY_FN = {
    "neg": np.negative,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sign": np.sign,
}

_BINARY_FN = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


def evaluate(e: Expr, t, x=()):
    """Evaluate ``e`` at time ``t`` and spatial point ``x`` (sequence of n).

    Scalars and numpy arrays broadcast.  A non-finite intermediate (division
    by zero, log/sqrt outside the domain, overflow) raises EvaluationError
    naming the offending subexpression.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _eval(e, t, x)


def _eval(e: Expr, t, x):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        if e.name == "t":
            val = t
        else:
            k = int(e.name[1:])
            if k > len(x):
                raise EvaluationError(e, f"point has no coordinate {e.name}")
            val = x[k - 1]
        return val
    if isinstance(e, Unary):
        out = _UNARY_FN[e.op](_eval(e.arg, t, x))
    else:
        out = _BINARY_FN[e.op](_eval(e.lhs, t, x), _eval(e.rhs, t, x))
    if not np.all(np.isfinite(out)):
        raise EvaluationError(e)
    return out


def variables(e: Expr) -> set[str]:
    """Names of the variables appearing in ``e``."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return variables(e.arg)
    if isinstance(e, Binary):
        return variables(e.lhs) | variables(e.rhs)
    return set()


# ---------------------------------------------------------------------------
# Symbolic differentiation
# ---------------------------------------------------------------------------


def differentiate(e: Expr, var: str) -> Expr:
    """Symbolic derivative of ``e`` with respect to ``var`` ("t" or "xk").

    Derivative ASTs are not simplified.  ``abs`` differentiates to
    ``sign`` (zero at the kink); ``sign`` differentiates to zero.
    """
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0 if e.name == var else 0.0)
    if isinstance(e, Unary):
        u, du = e.arg, differentiate(e.arg, var)
        if e.op == "neg":
            return Unary("neg", du)
        if e.op == "sin":
            return Binary("*", Unary("cos", u), du)
        if e.op == "cos":
            return Unary("neg", Binary("*", Unary("sin", u), du))
        if e.op == "exp":
            return Binary("*", Unary("exp", u), du)
        if e.op == "log":
            return Binary("/", du, u)
        if e.op == "sqrt":
            return Binary("/", du, Binary("*", Const(2.0), Unary("sqrt", u)))
        if e.op == "abs":
            return Binary("*", Unary("sign", u), du)
        if e.op == "sign":
            return Const(0.0)
        raise ValueError(f"unknown unary operator {e.op!r}")
    u, v = e.lhs, e.rhs
    du, dv = differentiate(u, var), differentiate(v, var)
    if e.op in "+-":
        return Binary(e.op, du, dv)
    if e.op == "*":
        return Binary("+", Binary("*", du, v), Binary("*", u, dv))
    if e.op == "/":
        num = Binary("-", Binary("*", du, v), Binary("*", u, dv))
        return Binary("/", num, Binary("^", v, Const(2.0)))
    if e.op == "^":
        if isinstance(v, Const):
            # power rule keeps negative bases with integer exponents legal
            inner = Binary("^", u, Const(v.value - 1.0))
            return Binary("*", Binary("*", Const(v.value), inner), du)
        bracket = Binary(
            "+",
            Binary("*", dv, Unary("log", u)),
            Binary("/", Binary("*", v, du), u),
        )
        return Binary("*", Binary("^", u, v), bracket)
    raise ValueError(f"unknown binary operator {e.op!r}")


# ---------------------------------------------------------------------------
# Printing (inverse of parse up to evaluation equivalence)
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, Const):
        # a negative literal reparses as unary minus; guard it like one
        return _PREC_ATOM if e.value >= 0 else _PREC_NEG
    if isinstance(e, Var):
        return _PREC_ATOM
    if isinstance(e, Unary):
        return _PREC_NEG if e.op == "neg" else _PREC_ATOM
    return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[e.op]


def _wrap(e: Expr, minimum: int) -> str:
    s = to_source(e)
    return f"({s})" if _prec(e) < minimum else s


def to_source(e: Expr) -> str:
    """Render ``e`` in the input grammar; parse(to_source(e)) evaluates like e.

    Parenthesization preserves the tree shape, so re-parsing reproduces the
    original floating-point evaluation order.
    """
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"-{_wrap(e.arg, _PREC_NEG)}"
        return f"{e.op}({to_source(e.arg)})"
    p = _prec(e)
    if e.op == "^":
        # right-associative; unary minus is legal on the exponent side
        return f"{_wrap(e.lhs, _PREC_ATOM)}^{_wrap(e.rhs, _PREC_NEG)}"
    return f"{_wrap(e.lhs, p)} {e.op} {_wrap(e.rhs, p + 1)}"
