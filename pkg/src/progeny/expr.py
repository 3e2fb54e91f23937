"""Tiny rate-expression language: univariate functions of the total progeny x.

Grammar (whitespace insignificant, "^" right-associative and binding
tighter than a unary minus applied to it)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := base ("^" factor)?
    base   := NUMBER | "x" | FUNC "(" expr ")" | "(" expr ")" | "-" factor
    FUNC   := "exp" | "log" | "sqrt"

NUMBER is a decimal literal with optional exponent.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import EvaluationError, ExprSyntaxError

__all__ = [
    "RateExpr",
    "Lit",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse_rate_expr",
    "render",
    "evaluate",
]

FUNCTIONS = {"exp": math.exp, "log": math.log, "sqrt": math.sqrt}


@dataclass(frozen=True)
class Lit:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "RateExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "RateExpr"
    right: "RateExpr"


@dataclass(frozen=True)
class Call:
    func: str  # one of exp log sqrt
    arg: "RateExpr"


RateExpr = Lit | Var | Neg | BinOp | Call


_TOKEN_RE = re.compile(
    r"""
    (?P<NUMBER>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<OP>[-+*/^()])
  | (?P<WS>\s+)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, text, offset) triples, terminated by an EOF token."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {text[pos]!r} at offset {pos}",
                offset=pos,
                expected=("NUMBER", "x", "FUNC", "(", "-"),
            )
        kind = m.lastgroup
        if kind != "WS":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, text, offset = self.peek()
        if kind == "OP" and text == op:
            self.advance()
            return
        raise ExprSyntaxError(
            f"expected {op!r} at offset {offset}, found {text or 'end of input'!r}",
            offset=offset,
            expected=(op,),
        )

    def parse(self) -> RateExpr:
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "EOF":
            raise ExprSyntaxError(
                f"unexpected trailing input {text!r} at offset {offset}",
                offset=offset,
                expected=("EOF",),
            )
        return node

    def expr(self) -> RateExpr:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "OP" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self) -> RateExpr:
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "OP" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.factor())
            else:
                return node

    def factor(self) -> RateExpr:
        node = self.base()
        kind, text, _ = self.peek()
        if kind == "OP" and text == "^":
            self.advance()
            return BinOp("^", node, self.factor())
        return node

    def base(self) -> RateExpr:
        kind, text, offset = self.advance()
        if kind == "NUMBER":
            return Lit(float(text))
        if kind == "IDENT":
            if text == "x":
                return Var()
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            raise ExprSyntaxError(
                f"unknown identifier {text!r} at offset {offset}",
                offset=offset,
                expected=("x",) + tuple(FUNCTIONS),
            )
        if kind == "OP" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "OP" and text == "-":
            # the exponent operator binds tighter: -x^2 == -(x^2)
            return Neg(self.factor())
        raise ExprSyntaxError(
            f"expected an operand at offset {offset}, found {text or 'end of input'!r}",
            offset=offset,
            expected=("NUMBER", "x", "FUNC", "(", "-"),
        )


def parse_rate_expr(text: str) -> RateExpr:
    """Parse expression text into its AST.

    Raises ExprSyntaxError (with byte offset and expected-token set) on
    malformed input or unknown identifiers.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", offset=0, expected=("NUMBER", "x", "FUNC", "(", "-"))
    return _Parser(text).parse()


# Precedence levels used by the renderer; higher binds tighter.
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 2.5
_PREC_POW = 3
_PREC_ATOM = 4


def _prec(node: RateExpr) -> float:
    if isinstance(node, BinOp):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(node, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def render(node: RateExpr) -> str:
    """Render an AST to text that re-parses to an identical AST."""
    if isinstance(node, Lit):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Call):
        return f"{node.func}({render(node.arg)})"
    if isinstance(node, Neg):
        inner = render(node.operand)
        if _prec(node.operand) <= _PREC_MUL:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        left, right = render(node.left), render(node.right)
        if node.op == "^":
            # left operand of ^ must be atomic; exponent may be ^ or unary
            if _prec(node.left) < _PREC_ATOM:
                left = f"({left})"
            if _prec(node.right) <= _PREC_MUL:
                right = f"({right})"
        else:
            op_prec = _prec(node)
            if _prec(node.left) < op_prec:
                left = f"({left})"
            # left-associative: equal-precedence right children need parens
            if _prec(node.right) <= op_prec:
                right = f"({right})"
        return f"{left}{node.op}{right}"
    raise TypeError(f"not a RateExpr node: {node!r}")


def evaluate(node: RateExpr, x: float) -> float:
    """Evaluate the expression at x; raise EvaluationError on non-finite results."""
    try:
        value = _eval(node, x)
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        raise EvaluationError(f"cannot evaluate {render(node)!r} at x={x}: {exc}") from exc
    if not math.isfinite(value):
        raise EvaluationError(f"expression {render(node)!r} is not finite at x={x}")
    return value


def _eval(node: RateExpr, x: float) -> float:
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, x))
    if isinstance(node, BinOp):
        a = _eval(node.left, x)
        b = _eval(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return math.pow(a, b)
    raise TypeError(f"not a RateExpr node: {node!r}")
