"""Pratt parser for the expression grammar.

Grammar (UTF-8 text)::

    expr     := expr ('+' | '-' | '*' | '/') expr | expr '^' expr
              | '-' expr | primary
    primary  := INTEGER | IDENT | IDENT '(' expr (',' expr)* ')'
              | 'D' '[' expr (',' IDENT ',' INTEGER)+ ']' | '(' expr ')'

``^`` is right associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)``.  Identifiers such as ``f_xx_y`` are derivative sugar when
``f`` is a declared function; otherwise they are plain symbols.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import sympy as sp

from .errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),\[\]=])
    """,
    re.VERBOSE,
)

BUILTINS = {"sqrt": sp.sqrt, "exp": sp.exp}
RESERVED = {"D"} | set(BUILTINS)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int  # byte offset into the UTF-8 encoding


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        byte_off = len(text[:pos].encode("utf-8"))
        if m is None:
            raise ParseError(f"unknown operator {text[pos]!r}", byte_off)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), byte_off))
        pos = m.end()
    tokens.append(Token("end", "", len(text.encode("utf-8"))))
    return tokens


_INFIX_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30


class _Parser:
    def __init__(self, text, functions, symbols):
        self.tokens = tokenize(text)
        self.pos = 0
        self.functions = dict(functions or {})
        self.symbols = dict(symbols or {})

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.text != text or t.kind not in ("op", "ident"):
            what = t.text or "end of input"
            raise ParseError(f"expected {text!r}, found {what!r}", t.offset)
        return self.advance()

    def parse(self, rbp: int = 0) -> sp.Expr:
        t = self.advance()
        left = self.nud(t)
        while rbp < self.lbp(self.tok):
            t = self.advance()
            left = self.led(t, left)
        return left

    def lbp(self, t: Token) -> int:
        if t.kind == "op":
            return _INFIX_BP.get(t.text, 0)
        if t.kind in ("num", "ident"):
            raise ParseError(f"unexpected {t.text!r}", t.offset)
        return 0

    def led(self, t: Token, left):
        op = t.text
        if op == "^":
            right = self.parse(_INFIX_BP["^"] - 1)
            return sp.Pow(left, right)
        right = self.parse(_INFIX_BP[op])
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if right == 0:
            raise ParseError("division by literal zero", t.offset)
        return left / right

    def nud(self, t: Token):
        if t.kind == "num":
            return sp.Integer(int(t.text))
        if t.kind == "op":
            if t.text == "-":
                return -self.parse(_UNARY_BP)
            if t.text == "+":
                return self.parse(_UNARY_BP)
            if t.text == "(":
                e = self.parse()
                self.expect(")")
                return e
        if t.kind == "ident":
            return self.identifier(t)
        what = t.text or "end of input"
        raise ParseError(f"unexpected {what!r}", t.offset)

    def identifier(self, t: Token):
        name = t.text
        if name == "D" and self.tok.text == "[":
            return self.derivative(t)
        if self.tok.text == "(" and self.tok.kind == "op":
            self.advance()
            args = [self.parse()]
            while self.tok.text == ",":
                self.advance()
                args.append(self.parse())
            self.expect(")")
            if name in BUILTINS:
                if len(args) != 1:
                    raise ParseError(f"{name} takes one argument", t.offset)
                return BUILTINS[name](args[0])
            return sp.Function(name)(*args)
        if name in BUILTINS or name == "D":
            raise ParseError(f"{name} must be applied", t.offset)
        if name in self.symbols:
            return self.symbols[name]
        if name in self.functions:
            return sp.Function(name)(*self.functions[name])
        head, sep, tail = name.partition("_")
        if sep and head in self.functions and tail:
            return self.suffix_derivative(head, tail, t)
        return sp.Symbol(name)

    def suffix_derivative(self, head, tail, t):
        args = self.functions[head]
        by_name = {str(a): a for a in args}
        variables = []
        for seg in tail.split("_"):
            if seg in by_name:
                variables.append(by_name[seg])
                continue
            for ch in seg:
                if ch not in by_name:
                    raise ParseError(
                        f"{head} has no argument {ch!r} in suffix {tail!r}", t.offset
                    )
                variables.append(by_name[ch])
        return sp.diff(sp.Function(head)(*args), *variables)

    def derivative(self, t):
        self.expect("[")
        inner_tok = self.tok
        if (
            inner_tok.kind == "ident"
            and inner_tok.text in self.functions
            and self.tokens[self.pos + 1].text == ","
        ):
            self.advance()
            target = sp.Function(inner_tok.text)(*self.functions[inner_tok.text])
        elif inner_tok.kind == "ident" and self.tokens[self.pos + 1].text == ",":
            # undeclared function: arguments are the differentiation variables
            self.advance()
            target = None
            fname = inner_tok.text
        else:
            target = self.parse()
        pairs = []
        while self.tok.text == ",":
            self.advance()
            v = self.advance()
            if v.kind != "ident":
                raise ParseError("expected a variable name", v.offset)
            self.expect(",")
            n = self.advance()
            if n.kind != "num":
                raise ParseError("expected a derivative order", n.offset)
            pairs.append((self.symbols.get(v.text, sp.Symbol(v.text)), int(n.text)))
        self.expect("]")
        if not pairs:
            raise ParseError("D[...] needs at least one variable", t.offset)
        if target is None:
            target = sp.Function(fname)(*[v for v, _ in pairs])
        orders = []
        for v, n in pairs:
            orders.extend([v] * n)
        return sp.diff(target, *orders) if orders else target


def parse(
    text: str,
    functions: Mapping[str, Sequence[sp.Symbol]] | None = None,
    symbols: Mapping[str, sp.Symbol] | None = None,
) -> sp.Expr:
    """Parse ``text`` into a sympy expression.

    ``functions`` declares opaque function symbols with their argument
    lists, e.g. ``{"Q": (x, y, p)}``; a bare ``Q`` then means ``Q(x, y, p)``
    and ``Q_pp`` its second ``p`` derivative.

    >>> parse("a/y^3")
    a/y**3
    """
    ps = _Parser(text, functions, symbols)
    if ps.tok.kind == "end":
        raise ParseError("empty expression", 0)
    e = ps.parse()
    if ps.tok.kind != "end":
        raise ParseError(f"unexpected {ps.tok.text!r}", ps.tok.offset)
    return e


def parse_relation(text: str, **kw) -> tuple[sp.Expr, sp.Expr]:
    """Parse ``lhs = rhs``; a bare expression means ``expr = 0``."""
    if text.count("=") > 1:
        second = text.index("=", text.index("=") + 1)
        raise ParseError("more than one '='", len(text[:second].encode()))
    if "=" not in text:
        return parse(text, **kw), sp.Integer(0)
    lhs, rhs = text.split("=")
    off = len(lhs.encode()) + 1
    try:
        right = parse(rhs, **kw)
    except ParseError as exc:
        raise ParseError(exc.message, exc.offset + off) from None
    return parse(lhs, **kw), right
