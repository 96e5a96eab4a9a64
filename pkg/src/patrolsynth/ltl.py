"""LTL formulas: parsing, normal forms, and direct lasso-word semantics.

Concrete syntax: `!  &  |  ->  X  U  G  F`, parentheses, `true`, `false`,
and identifiers for atomic propositions.  Precedence from weakest to
strongest: `->` (right), `|`, `&`, `U` (right), then the unary operators.
`a -> b` is parsed as `!a | b`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class LtlSyntaxError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)


@dataclass(frozen=True)
class TrueConst(Formula):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class FalseConst(Formula):
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula

    def __str__(self):
        return f"!{_wrap(self.sub)}"


@dataclass(frozen=True)
class Next(Formula):
    sub: Formula

    def __str__(self):
        return f"X {_wrap(self.sub)}"


@dataclass(frozen=True)
class Always(Formula):
    sub: Formula

    def __str__(self):
        return f"G {_wrap(self.sub)}"


@dataclass(frozen=True)
class Eventually(Formula):
    sub: Formula

    def __str__(self):
        return f"F {_wrap(self.sub)}"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} U {self.right})"


@dataclass(frozen=True)
class Release(Formula):
    """Dual of Until; produced by normalization, not by the parser."""

    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} R {self.right})"


TRUE = TrueConst()
FALSE = FalseConst()


def _wrap(f: Formula) -> str:
    if isinstance(f, (Atom, TrueConst, FalseConst, Not)):
        return str(f)
    return f"({f})"


_TOKEN = re.compile(r"\s*(->|[!&|()]|[A-Za-z_][A-Za-z0-9_]*)")
_OPERATOR_NAMES = {"X", "U", "G", "F"}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise LtlSyntaxError(f"unexpected character {stripped[0]!r}", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    tokens.append((None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self):
        return self.tokens[self.index][0]

    def advance(self):
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, value):
        tok, pos = self.advance()
        if tok != value:
            raise LtlSyntaxError(f"expected {value!r}, found {tok!r}", pos)

    def parse(self) -> Formula:
        f = self.parse_implies()
        tok, pos = self.tokens[self.index]
        if tok is not None:
            raise LtlSyntaxError(f"unexpected token {tok!r}", pos)
        return f

    def parse_implies(self) -> Formula:
        left = self.parse_or()
        if self.peek() == "->":
            self.advance()
            right = self.parse_implies()
            return Or(Not(left), right)
        return left

    def parse_or(self) -> Formula:
        f = self.parse_and()
        while self.peek() == "|":
            self.advance()
            f = Or(f, self.parse_and())
        return f

    def parse_and(self) -> Formula:
        f = self.parse_until()
        while self.peek() == "&":
            self.advance()
            f = And(f, self.parse_until())
        return f

    def parse_until(self) -> Formula:
        left = self.parse_unary()
        if self.peek() == "U":
            self.advance()
            return Until(left, self.parse_until())
        return left

    def parse_unary(self) -> Formula:
        tok, pos = self.advance()
        if tok == "!":
            return Not(self.parse_unary())
        if tok == "X":
            return Next(self.parse_unary())
        if tok == "G":
            return Always(self.parse_unary())
        if tok == "F":
            return Eventually(self.parse_unary())
        if tok == "(":
            f = self.parse_implies()
            self.expect(")")
            return f
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if tok is None:
            raise LtlSyntaxError("unexpected end of input", pos)
        if tok in _OPERATOR_NAMES or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            raise LtlSyntaxError(f"unexpected token {tok!r}", pos)
        return Atom(tok)


def parse_ltl(text: str) -> Formula:
    return _Parser(text).parse()


def atoms(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset([f.name])
    if isinstance(f, (TrueConst, FalseConst)):
        return frozenset()
    if isinstance(f, (Not, Next, Always, Eventually)):
        return atoms(f.sub)
    return atoms(f.left) | atoms(f.right)


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten top-level conjunctions."""
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def negation_normal_form(f: Formula) -> Formula:
    """Push negations to atoms; rewrite G/F in terms of Release/Until."""
    if isinstance(f, (TrueConst, FalseConst, Atom)):
        return f
    if isinstance(f, And):
        return And(negation_normal_form(f.left), negation_normal_form(f.right))
    if isinstance(f, Or):
        return Or(negation_normal_form(f.left), negation_normal_form(f.right))
    if isinstance(f, Next):
        return Next(negation_normal_form(f.sub))
    if isinstance(f, Until):
        return Until(negation_normal_form(f.left), negation_normal_form(f.right))
    if isinstance(f, Release):
        return Release(negation_normal_form(f.left), negation_normal_form(f.right))
    if isinstance(f, Eventually):
        return Until(TRUE, negation_normal_form(f.sub))
    if isinstance(f, Always):
        return Release(FALSE, negation_normal_form(f.sub))
    if isinstance(f, Not):
        g = f.sub
        if isinstance(g, TrueConst):
            return FALSE
        if isinstance(g, FalseConst):
            return TRUE
        if isinstance(g, Atom):
            return f
        if isinstance(g, Not):
            return negation_normal_form(g.sub)
        if isinstance(g, And):
            return Or(negation_normal_form(Not(g.left)), negation_normal_form(Not(g.right)))
        if isinstance(g, Or):
            return And(negation_normal_form(Not(g.left)), negation_normal_form(Not(g.right)))
        if isinstance(g, Next):
            return Next(negation_normal_form(Not(g.sub)))
        if isinstance(g, Until):
            return Release(negation_normal_form(Not(g.left)), negation_normal_form(Not(g.right)))
        if isinstance(g, Release):
            return Until(negation_normal_form(Not(g.left)), negation_normal_form(Not(g.right)))
        if isinstance(g, Eventually):
            return Release(FALSE, negation_normal_form(Not(g.sub)))
        if isinstance(g, Always):
            return Until(TRUE, negation_normal_form(Not(g.sub)))
    raise TypeError(f"not an LTL formula: {f!r}")


def eval_lasso(f: Formula, prefix, cycle) -> bool:
    """Evaluate `f` on the ultimately periodic word prefix . cycle^omega.

    Letters are sets of proposition names.  Works directly on the formula by
    fixpoint iteration over the finitely many distinct suffix positions, so it
    is independent of any automaton construction.
    """
    cycle = [frozenset(a) for a in cycle]
    prefix = [frozenset(a) for a in prefix]
    if not cycle:
        raise ValueError("the cycle part of a lasso must be non-empty")
    word = prefix + cycle
    n = len(word)
    loop = len(prefix)

    def succ(i: int) -> int:
        return i + 1 if i + 1 < n else loop

    cache: dict[Formula, list[bool]] = {}

    def table(g: Formula) -> list[bool]:
        if g in cache:
            return cache[g]
        if isinstance(g, TrueConst):
            vals = [True] * n
        elif isinstance(g, FalseConst):
            vals = [False] * n
        elif isinstance(g, Atom):
            vals = [g.name in word[i] for i in range(n)]
        elif isinstance(g, Not):
            vals = [not v for v in table(g.sub)]
        elif isinstance(g, And):
            lt, rt = table(g.left), table(g.right)
            vals = [a and b for a, b in zip(lt, rt)]
        elif isinstance(g, Or):
            lt, rt = table(g.left), table(g.right)
            vals = [a or b for a, b in zip(lt, rt)]
        elif isinstance(g, Next):
            st = table(g.sub)
            vals = [st[succ(i)] for i in range(n)]
        elif isinstance(g, Eventually):
            vals = _least_fixpoint(n, succ, table(g.sub), [True] * n)
        elif isinstance(g, Until):
            vals = _least_fixpoint(n, succ, table(g.right), table(g.left))
        elif isinstance(g, Always):
            vals = _greatest_fixpoint(n, succ, table(g.sub), [False] * n)
        elif isinstance(g, Release):
            vals = _greatest_fixpoint(n, succ, table(g.right), table(g.left))
        else:
            raise TypeError(f"not an LTL formula: {g!r}")
        cache[g] = vals
        return vals

    return table(f)[0]


def _least_fixpoint(n, succ, target, keep):
    # vals[i] = target[i] or (keep[i] and vals[succ(i)]), least solution
    vals = [False] * n
    changed = True
    while changed:
        changed = False
        for i in range(n - 1, -1, -1):
            v = target[i] or (keep[i] and vals[succ(i)])
            if v != vals[i]:
                vals[i] = v
                changed = True
    return vals


def _greatest_fixpoint(n, succ, hold, release):
    # vals[i] = hold[i] and (release[i] or vals[succ(i)]), greatest solution
    vals = [True] * n
    changed = True
    while changed:
        changed = False
        for i in range(n - 1, -1, -1):
            v = hold[i] and (release[i] or vals[succ(i)])
            if v != vals[i]:
                vals[i] = v
                changed = True
    return vals
