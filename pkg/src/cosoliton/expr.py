"""Recursive-descent parser and evaluator for real-valued scalar expressions.

Expressions are formulas in coordinate and parameter names, used for frame
coefficients, metric entries, tensor components and vector fields.

Grammar (whitespace-insensitive)::

    expr   := term  (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

'^' is right-associative and binds tighter than unary minus, so "-x^2"
means -(x^2).  The callable function set is fixed; `pi` and `e` are
predeclared read-only constants.  Every other identifier must be bound at
evaluation time: an unresolved name raises, it never silently becomes zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CosolitonError


class ExpressionError(CosolitonError):
    """Base class for expression parsing/evaluation failures."""


class ParseError(ExpressionError):
    """Syntax error; carries the byte offset into the UTF-8 source text."""

    def __init__(self, message: str, text: str, position: int):
        self.offset = len(text[:position].encode("utf-8"))
        super().__init__(f"{message} (byte offset {self.offset})")


class EvaluationError(ExpressionError):
    """Unbound identifier or other evaluation-time failure."""


class DomainError(EvaluationError):
    """Argument outside the real domain of an operation (log(-1), sqrt(-2), 1/0, ...)."""


# Fixed whitelist: evaluation stays total and auditable.
FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sinh", "cosh", "tanh", "sqrt", "abs")

CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Expression = Num | Var | Neg | BinOp | Call


# ---------------------------------------------------------------------------
# Lexer

_OPERATORS = "+-*/^(),"
_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind  # 'num' | 'ident' | 'op' | 'end'
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPERATORS:
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            tokens.append(_Token("num", text[start:i], start))
            continue
        if ch in _IDENT_START:
            start = i
            while i < n and text[i] in _IDENT_CONT:
                i += 1
            tokens.append(_Token("ident", text[start:i], start))
            continue
        raise ParseError(f"unexpected character {ch!r}", text, i)
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect_op(self, op: str):
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ParseError(f"expected {op!r}", self.text, tok.pos)
        return self.advance()

    def parse(self) -> Expression:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r}", self.text, tok.pos)
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        tok = self.advance()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "ident":
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if tok.text not in FUNCTIONS:
                    raise ParseError(f"unknown function {tok.text!r}", self.text, tok.pos)
                self.advance()
                args = [self.expr()]
                while self.peek().kind == "op" and self.peek().text == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect_op(")")
                if len(args) != 1:
                    raise ParseError(
                        f"function {tok.text!r} takes 1 argument, got {len(args)}",
                        self.text, tok.pos)
                return Call(tok.text, tuple(args))
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if tok.kind == "end":
            raise ParseError("unexpected end of input", self.text, tok.pos)
        raise ParseError(f"unexpected token {tok.text!r}", self.text, tok.pos)


def parse_expression(text: str) -> Expression:
    """Parse `text` into an expression tree."""
    if not text or text.isspace():
        raise ParseError("empty input", text, 0)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Evaluation

def _apply(func: str, x: float) -> float:
    if func == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            raise DomainError(f"exp overflow for argument {x!r}") from None
    if func == "log":
        if x <= 0.0:
            raise DomainError(f"log of non-positive value {x!r}")
        return math.log(x)
    if func == "sqrt":
        if x < 0.0:
            raise DomainError(f"sqrt of negative value {x!r}")
        return math.sqrt(x)
    if func == "sin":
        return math.sin(x)
    if func == "cos":
        return math.cos(x)
    if func == "tan":
        return math.tan(x)
    if func == "sinh":
        return math.sinh(x)
    if func == "cosh":
        return math.cosh(x)
    if func == "tanh":
        return math.tanh(x)
    if func == "abs":
        return abs(x)
    raise EvaluationError(f"unknown function {func!r}")


def _power(base: float, exponent: float) -> float:
    if base < 0.0 and exponent != math.floor(exponent):
        raise DomainError(
            f"non-integer power {exponent!r} of negative base {base!r}")
    if base == 0.0 and exponent < 0.0:
        raise DomainError(f"zero raised to negative power {exponent!r}")
    try:
        return math.pow(base, exponent)
    except OverflowError:
        raise DomainError(f"overflow in {base!r} ^ {exponent!r}") from None


def evaluate(e: Expression, bindings: dict[str, float]) -> float:
    """Evaluate `e` with the given name bindings (IEEE double precision).

    `pi` and `e` are always bound; rebinding them is an error.
    """
    for name in CONSTANTS:
        if name in bindings:
            raise EvaluationError(f"{name!r} is a read-only constant")
    return _eval(e, bindings)


def _eval(node: Expression, bindings: dict[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name in bindings:
            return bindings[node.name]
        if node.name in CONSTANTS:
            return CONSTANTS[node.name]
        raise EvaluationError(f"unbound identifier {node.name!r}")
    if isinstance(node, Neg):
        return -_eval(node.operand, bindings)
    if isinstance(node, BinOp):
        a = _eval(node.left, bindings)
        b = _eval(node.right, bindings)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if b == 0.0:
                raise DomainError("division by zero")
            return a / b
        if node.op == "^":
            return _power(a, b)
        raise EvaluationError(f"unknown operator {node.op!r}")
    if isinstance(node, Call):
        return _apply(node.func, _eval(node.args[0], bindings))
    raise EvaluationError(f"malformed expression node {node!r}")


def variables(e: Expression) -> set[str]:
    """All identifiers referenced by `e` (excluding the built-in constants)."""
    out: set[str] = set()
    _collect(e, out)
    return out - set(CONSTANTS)


def _collect(node: Expression, out: set):
    if isinstance(node, Var):
        out.add(node.name)
    elif isinstance(node, Neg):
        _collect(node.operand, out)
    elif isinstance(node, BinOp):
        _collect(node.left, out)
        _collect(node.right, out)
    elif isinstance(node, Call):
        for a in node.args:
            _collect(a, out)


# ---------------------------------------------------------------------------
# Serialization
#
# Precedence levels: add 1, mul 2, unary minus 3, power 4, atoms 5.  Binary
# chains re-parse left-leaning, so a left child at the same level needs no
# parentheses while a right child does; '^' is the mirror image (its left
# side must be an atom, its right side anything unary-or-tighter).

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_NEG, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _level(node: Expression) -> int:
    if isinstance(node, BinOp):
        if node.op in "+-":
            return _LEVEL_ADD
        if node.op in "*/":
            return _LEVEL_MUL
        return _LEVEL_POW
    if isinstance(node, Neg):
        return _LEVEL_NEG
    return _LEVEL_ATOM


def serialize(e: Expression) -> str:
    """Render `e` back to source text; parsing the result recovers an equal tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = serialize(e.operand)
        if _level(e.operand) < _LEVEL_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(serialize(a) for a in e.args)})"
    if isinstance(e, BinOp):
        lvl = _level(e)
        left = serialize(e.left)
        right = serialize(e.right)
        if e.op == "^":
            if _level(e.left) <= _LEVEL_POW:
                left = f"({left})"
            if _level(e.right) < _LEVEL_NEG:
                right = f"({right})"
        else:
            if _level(e.left) < lvl:
                left = f"({left})"
            if _level(e.right) <= lvl:
                right = f"({right})"
        return f"{left}{e.op}{right}"
    raise EvaluationError(f"malformed expression node {e!r}")
