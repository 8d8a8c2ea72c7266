"""Expression trees over the variables a, b, c and their shape classification."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .core import MagmaError, ParseError, Structure

VARIABLES = ("a", "b", "c")
CONST_TOKEN = "_const"


class UnknownSymbol(ParseError):
    pass


class UnboundVariable(ParseError):
    pass


class SubexpressionPair(MagmaError):
    """One side of an equation is a subexpression of the other."""


@dataclass(frozen=True)
class Leaf:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Node:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"({self.left}{self.op}{self.right})"


Expr = Union[Leaf, Node]


@dataclass(frozen=True)
class Equation:
    lhs: Expr
    rhs: Expr

    def __str__(self):
        return f"{self.lhs}={self.rhs}"


@dataclass(frozen=True)
class ConstantTerm:
    """f(a, b, c) takes the same value on every triple."""

    f: Expr

    def __str__(self):
        return f"{self.f}={CONST_TOKEN}"


Identity = Union[Equation, ConstantTerm]


class Regime(enum.IntEnum):
    QUADRATIC = 1
    MATRIX = 2
    CUBIC = 3

    def __str__(self):
        return self.name.lower()


# --- parsing ---------------------------------------------------------------


def _tokenize(text: str, alphabet: Iterable[str], line: int | None = None):
    ops = sorted(set(alphabet), key=len, reverse=True)
    toks = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "()=":
            toks.append(("punct", ch, i))
            i += 1
            continue
        op = next((o for o in ops if text.startswith(o, i)), None)
        if op is not None:
            toks.append(("op", op, i))
            i += len(op)
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], i))
            i = j
            continue
        raise UnknownSymbol(f"unknown symbol {ch!r} at column {i + 1}", line)
    return toks


class _Parser:
    def __init__(self, toks, line):
        self.toks = toks
        self.pos = 0
        self.line = line

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.line)
        self.pos += 1
        return tok

    def expr(self) -> Expr:
        left = self.operand()
        tok = self.peek()
        if tok is not None and tok[0] == "op":
            self.pos += 1
            right = self.operand()
            nxt = self.peek()
            if nxt is not None and nxt[0] == "op":
                raise ParseError(
                    f"ambiguous expression at column {nxt[2] + 1}: add parentheses", self.line
                )
            return Node(tok[1], left, right)
        return left

    def operand(self) -> Expr:
        kind, val, col = self.take()
        if kind == "punct" and val == "(":
            e = self.expr()
            kind2, val2, col2 = self.take()
            if (kind2, val2) != ("punct", ")"):
                raise ParseError(f"expected ')' at column {col2 + 1}", self.line)
            return e
        if kind == "name":
            if val not in VARIABLES:
                raise UnboundVariable(f"unbound variable {val!r} at column {col + 1}", self.line)
            return Leaf(val)
        raise ParseError(f"unexpected {val!r} at column {col + 1}", self.line)


def parse_expression(text: str, alphabet: Iterable[str] = ("+", "*")) -> Expr:
    p = _Parser(_tokenize(text, alphabet), None)
    e = p.expr()
    if p.peek() is not None:
        raise ParseError(f"unexpected trailing input at column {p.peek()[2] + 1}")
    return e


def parse_identity(text: str, alphabet: Iterable[str] = ("+", "*")) -> Identity:
    """Parse ``lhs=rhs`` or ``f=_const``.

    Operands of every binary operator must be variables or parenthesised.
    """
    alphabet = list(alphabet)
    for o in alphabet:
        if o in VARIABLES or any(ch in "()=" for ch in o) or not o:
            raise ParseError(f"invalid operation symbol {o!r}")
    if text.count("=") != 1:
        raise ParseError("identity must contain exactly one '='")
    left, right = text.split("=")
    lhs = parse_expression(left, alphabet)
    if right.strip() == CONST_TOKEN:
        return ConstantTerm(lhs)
    return Equation(lhs, parse_expression(right, alphabet))


def to_text(x: Expr | Identity) -> str:
    return str(x)


# --- structural queries ----------------------------------------------------


def variables(e: Expr) -> frozenset:
    if isinstance(e, Leaf):
        return frozenset([e.name])
    return variables(e.left) | variables(e.right)


def operations(e: Expr) -> frozenset:
    if isinstance(e, Leaf):
        return frozenset()
    return frozenset([e.op]) | operations(e.left) | operations(e.right)


def depth(e: Expr) -> int:
    if isinstance(e, Leaf):
        return 0
    return 1 + max(depth(e.left), depth(e.right))


def size(e: Expr) -> int:
    if isinstance(e, Leaf):
        return 1
    return 1 + size(e.left) + size(e.right)


def subexpressions(e: Expr) -> list:
    """Distinct subtrees of ``e`` in post-order (children before parents)."""
    out: list = []
    seen: set = set()

    def walk(x):
        if isinstance(x, Node):
            walk(x.left)
            walk(x.right)
        if x not in seen:
            seen.add(x)
            out.append(x)

    walk(e)
    return out


def is_subexpression(f: Expr, g: Expr) -> bool:
    """True if f occurs as a subtree of g."""
    if f == g:
        return True
    if isinstance(g, Node):
        return is_subexpression(f, g.left) or is_subexpression(f, g.right)
    return False


def is_decomposable(f: Expr, h: Expr) -> bool:
    """f can be written as F(h) for an expression F in one variable."""
    if f == h:
        return True
    if isinstance(f, Node):
        return is_decomposable(f.left, h) and is_decomposable(f.right, h)
    return False


def is_similar(f: Expr, g: Expr) -> bool:
    """f = F(h) and g = G(h) for a common expression h."""
    return any(is_decomposable(g, h) for h in subexpressions(f) if is_decomposable(f, h))


def rename(e: Expr, mapping: Mapping[str, str]) -> Expr:
    if isinstance(e, Leaf):
        return Leaf(mapping.get(e.name, e.name))
    return Node(e.op, rename(e.left, mapping), rename(e.right, mapping))


def _covers(e: Expr, tokens) -> bool:
    if e in tokens:
        return True
    if isinstance(e, Node):
        return _covers(e.left, tokens) and _covers(e.right, tokens)
    return False


def _replace(e: Expr, tokens: Mapping) -> Expr:
    if e in tokens:
        return tokens[e]
    if isinstance(e, Node):
        return Node(e.op, _replace(e.left, tokens), _replace(e.right, tokens))
    return e


# --- shape decompositions --------------------------------------------------

# Placeholder leaf names used in skeletons; they can never come out of the parser.
PH_G, PH_H, PH_I = "#g", "#h", "#i"


@dataclass(frozen=True)
class QuadraticForm:
    """f = H(G(x, y), v): ``outer`` is H with G replaced by the leaf '#g'."""

    v: str
    pair: tuple
    inner: Expr | None
    outer: Expr


@dataclass(frozen=True)
class MatrixForm:
    """f = J(I(H(x, y), v), G(x, y)).

    ``i_skel`` is I with H replaced by '#h'; ``j_skel`` is J with the I-part
    replaced by '#i' and G by '#g'.  Absent pieces are None.
    """

    v: str
    pair: tuple
    h: Expr | None
    g: Expr | None
    i_skel: Expr | None
    j_skel: Expr


def _candidates(f: Expr, allowed: frozenset) -> list:
    subs = [e for e in subexpressions(f) if variables(e) <= allowed]
    subs.sort(key=size, reverse=True)
    return subs + [None]


def quadratic_form(f: Expr) -> QuadraticForm | None:
    for v in ("c", "b", "a"):
        pair = tuple(x for x in VARIABLES if x != v)
        vleaf = Leaf(v)
        for g in _candidates(f, frozenset(pair)):
            tokens = {vleaf: vleaf}
            if g is not None:
                tokens[g] = Leaf(PH_G)
            if _covers(f, tokens):
                return QuadraticForm(v, pair, g, _replace(f, tokens))
    return None


def matrix_form(f: Expr) -> MatrixForm | None:
    for v in ("c", "b", "a"):
        pair = tuple(x for x in VARIABLES if x != v)
        allowed = frozenset(pair)
        vleaf = Leaf(v)
        pair_cands = _candidates(f, allowed)
        for t in subexpressions(f)[::-1] + [None]:
            if t is None:
                h_choice = None
                i_skel = None
            else:
                h_choice = False
                for h in pair_cands:
                    tokens = {vleaf: vleaf}
                    if h is not None:
                        tokens[h] = Leaf(PH_H)
                    if _covers(t, tokens):
                        h_choice = h
                        i_skel = _replace(t, tokens)
                        break
                if h_choice is False:
                    continue
            for g in pair_cands:
                tokens = {}
                if t is not None:
                    tokens[t] = Leaf(PH_I)
                if g is not None:
                    tokens.setdefault(g, Leaf(PH_G))
                if _covers(f, tokens):
                    return MatrixForm(v, pair, h_choice, g, i_skel, _replace(f, tokens))
    return None


def classify_shape(f: Expr) -> Regime:
    if quadratic_form(f) is not None:
        return Regime.QUADRATIC
    if matrix_form(f) is not None:
        return Regime.MATRIX
    return Regime.CUBIC


def is_natural(ident: Identity) -> bool:
    if isinstance(ident, ConstantTerm):
        return True
    return not (is_subexpression(ident.lhs, ident.rhs) or is_subexpression(ident.rhs, ident.lhs))


def classify_identity(ident: Identity) -> Regime:
    """Regime of an identity; the larger of the two sides for equations.

    Raises SubexpressionPair when one side is a subexpression of the other.
    """
    if isinstance(ident, ConstantTerm):
        return classify_shape(ident.f)
    if not is_natural(ident):
        raise SubexpressionPair(f"{ident.lhs} and {ident.rhs}: one side contains the other")
    return max(classify_shape(ident.lhs), classify_shape(ident.rhs))


def is_read_once(e: Expr) -> bool:
    names = []

    def walk(x):
        if isinstance(x, Leaf):
            names.append(x.name)
        else:
            walk(x.left)
            walk(x.right)

    walk(e)
    return len(names) == len(set(names))


# --- evaluation ------------------------------------------------------------


def evaluate(e: Expr, s: Structure, env: Mapping[str, object]):
    """Evaluate ``e`` with numpy broadcasting; env maps leaf names to index arrays."""
    if isinstance(e, Leaf):
        return env[e.name]
    return s.table(e.op)[evaluate(e.left, s, env), evaluate(e.right, s, env)]


def evaluate_at(e: Expr, s: Structure, a: int, b: int, c: int) -> int:
    return int(evaluate(e, s, {"a": a, "b": b, "c": c}))


def grid(e: Expr | None, s: Structure, first: str, second: str) -> np.ndarray:
    """n x n table of e over (first, second); a zero table when e is None."""
    n = s.n
    if e is None:
        return np.zeros((n, n), dtype=np.int64)
    r = np.arange(n)
    env = {first: r[:, None], second: r[None, :]}
    out = evaluate(e, s, env)
    return np.broadcast_to(np.asarray(out, dtype=np.int64), (n, n))


def all_permutations(e: Expr):
    for perm in itertools.permutations(VARIABLES):
        yield rename(e, dict(zip(VARIABLES, perm)))
