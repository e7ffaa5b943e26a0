"""Gate trigger expression language.

Grammar:
    expr := term (("and"|"or") term)*
    term := ["not"] atom
    atom := signal_name op number | "has_flag(" flag_kind ")" | "(" expr ")"
    op   := < | <= | > | >= | ==

and/or bind at the same level, left-associative, exactly as the grammar
reads. Signal names resolve against a step's epistemic state; a comparison
on an absent signal is false.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import TriggerParseError

_TOKEN = re.compile(
    r"\s*(?:(?P<op><=|>=|==|<|>)|(?P<num>\d+(?:\.\d+)?)|(?P<lparen>\()|(?P<rparen>\))"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_]*))"
)

_KEYWORDS = {"and", "or", "not", "has_flag"}


def _tokenize(expr: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(expr):
        match = _TOKEN.match(expr, pos)
        if match is None:
            if expr[pos:].strip() == "":
                break
            raise TriggerParseError(
                f"unexpected character {expr[pos:].strip()[0]!r}", len(tokens)
            )
        tokens.append(match.group().strip())
        pos = match.end()
    return tokens


@dataclass
class _Comparison:
    signal: str
    op: str
    value: float

    def evaluate(self, state) -> bool:
        actual = state.signal_value(self.signal)
        if actual is None:
            return False
        return {
            "<": actual < self.value,
            "<=": actual <= self.value,
            ">": actual > self.value,
            ">=": actual >= self.value,
            "==": actual == self.value,
        }[self.op]


@dataclass
class _HasFlag:
    flag_kind: str

    def evaluate(self, state) -> bool:
        return any(f.kind == self.flag_kind for f in state.flags)


@dataclass
class _Not:
    inner: object

    def evaluate(self, state) -> bool:
        return not self.inner.evaluate(state)


@dataclass
class _Chain:
    first: object
    rest: list  # (operator, node) pairs, evaluated left to right

    def evaluate(self, state) -> bool:
        result = self.first.evaluate(state)
        for op, node in self.rest:
            if op == "and":
                result = result and node.evaluate(state)
            else:
                result = result or node.evaluate(state)
        return result


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        token = self.peek()
        if token is None:
            raise TriggerParseError("unexpected end of expression", self.pos)
        self.pos += 1
        return token

    def expect(self, token: str) -> None:
        got = self.take()
        if got != token:
            raise TriggerParseError(f"expected {token!r}, got {got!r}", self.pos - 1)

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            raise TriggerParseError(f"trailing token {self.peek()!r}", self.pos)
        return node

    def expr(self):
        first = self.term()
        rest = []
        while self.peek() in ("and", "or"):
            op = self.take()
            rest.append((op, self.term()))
        return _Chain(first, rest) if rest else first

    def term(self):
        if self.peek() == "not":
            self.take()
            return _Not(self.atom())
        return self.atom()

    def atom(self):
        token = self.take()
        if token == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if token == "has_flag":
            self.expect("(")
            flag = self.take()
            if flag in _KEYWORDS or not re.fullmatch(r"[A-Z_]+", flag):
                raise TriggerParseError(f"bad flag kind {flag!r}", self.pos - 1)
            self.expect(")")
            return _HasFlag(flag)
        if token in _KEYWORDS or not re.fullmatch(r"[a-z_][a-z0-9_]*", token):
            raise TriggerParseError(f"expected signal name, got {token!r}", self.pos - 1)
        op = self.take()
        if op not in ("<", "<=", ">", ">=", "=="):
            raise TriggerParseError(f"expected comparison operator, got {op!r}", self.pos - 1)
        number = self.take()
        try:
            value = float(number)
        except ValueError:
            raise TriggerParseError(f"expected number, got {number!r}", self.pos - 1) from None
        return _Comparison(token, op, value)


def parse_trigger(expr: str):
    return _Parser(_tokenize(expr)).parse()


def evaluate_gate_trigger(expr: str, state) -> bool:
    """Parse and evaluate a trigger expression against a step's state."""
    return parse_trigger(expr).evaluate(state)
