"""Reductions whose output is a structure, optionally with an identity."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core import MagmaError, Structure, make_structure
from ..detect import BinaryMatrix, ShapeMismatch, WeightedGraph, WeightedTripartite
from ..expr import ConstantTerm, Expr, Identity, Leaf, Node, parse_expression, subexpressions

INF = 0  # index of the absorbing element in every generated structure
SQUARE_C = 10


class MissingConstant(MagmaError):
    pass


class WeightOutOfRange(MagmaError, ValueError):
    pass


@dataclass
class IdentityInstance:
    """A structure plus an identity; ``witness_map`` turns a failing triple
    of the identity into a witness of the source problem."""

    structure: Structure
    identity: Identity
    family: str = ""
    witness_map: Callable | None = field(default=None, repr=False)

    @property
    def expression(self) -> Expr:
        return self.identity.f if isinstance(self.identity, ConstantTerm) else self.identity.lhs


# --- triangle -> distributivity -------------------------------------------


def triangle_to_distributivity(adj) -> Structure:
    """Distributivity a*(b+c) = (a*b)+(a*c) holds iff the graph has no triangle.

    Elements: inf=0, delta=1, vertex v -> v+2.
    """
    a = np.asarray(adj, dtype=bool)
    n = a.shape[0]
    if not np.array_equal(a, a.T) or np.diag(a).any():
        raise ValueError("adjacency must be symmetric without loops")
    size = n + 2
    add = np.full((size, size), INF, dtype=np.int64)
    mul = np.full((size, size), INF, dtype=np.int64)
    add[2:, 2:] = np.where(a, 1, INF)
    verts = np.arange(n) + 2
    mul[2:, 2:] = np.where(a, verts[None, :], INF)
    return make_structure(size, {"+": add, "*": mul}, {"inf": INF, "delta": 1})


def triangle_witness(structure_witness) -> tuple:
    a, b, c = structure_witness
    return tuple(sorted((a - 2, b - 2, c - 2)))


# --- zero triangle -> constant identity ----------------------------------

ZERO_TRIANGLE_EXPR = "((a*b)+(a*c))+(b*c)"


def tripartite_to_graph(t: WeightedTripartite) -> WeightedGraph:
    """Vertices x_i = i, y_i = n + i, z_i = 2n + i."""
    n = t.n
    w = np.zeros((3 * n, 3 * n), dtype=np.int64)
    m = np.zeros((3 * n, 3 * n), dtype=bool)
    for (r0, c0), ww, mm in (((0, n), t.w_xy, t.m_xy), ((n, 2 * n), t.w_yz, t.m_yz), ((2 * n, 0), t.w_zx, t.m_zx)):
        w[r0:r0 + n, c0:c0 + n] = ww
        m[r0:r0 + n, c0:c0 + n] = mm
        w[c0:c0 + n, r0:r0 + n] = ww.T
        m[c0:c0 + n, r0:r0 + n] = mm.T
    return WeightedGraph(np.where(m, w, 0), m)


def zero_triangle_to_constant_identity(g: WeightedGraph | WeightedTripartite, M: int | None = None) -> IdentityInstance:
    """((a*b)+(a*c))+(b*c) is constant iff no triangle has total weight 0.

    Layout: inf=0, delta=1, vertices 2..n+1, then (w,1) for |w| <= M and
    (w,2) for |w| <= 2M.  With M = n the size is 7n + 4.
    """
    if isinstance(g, WeightedTripartite):
        g = tripartite_to_graph(g)
    n = g.n
    wmax = int(np.abs(g.weights[g.mask]).max()) if g.mask.any() else 0
    M = max(n, wmax) if M is None else M
    if wmax > M:
        raise WeightOutOfRange(f"weights exceed bound M={M}")
    base1 = 2 + n
    base2 = base1 + 2 * M + 1
    size = base2 + 4 * M + 1
    one = lambda w: base1 + w + M  # noqa: E731
    two = lambda w: base2 + w + 2 * M  # noqa: E731
    mul = np.full((size, size), INF, dtype=np.int64)
    add = np.full((size, size), INF, dtype=np.int64)
    verts = slice(2, 2 + n)
    mul[verts, verts] = np.where(g.mask, one(g.weights), INF)
    w1 = np.arange(-M, M + 1)
    add[one(w1)[:, None], one(w1)[None, :]] = two(w1[:, None] + w1[None, :])
    w2 = np.arange(-2 * M, 2 * M + 1)
    add[two(w2)[:, None], one(w1)[None, :]] = np.where(w2[:, None] + w1[None, :] == 0, 1, INF)
    s = make_structure(size, {"*": mul, "+": add}, {"inf": INF, "delta": 1})
    ident = ConstantTerm(parse_expression(ZERO_TRIANGLE_EXPR))

    def witness_map(triple):
        return tuple(v - 2 for v in triple)

    return IdentityInstance(s, ident, "zero-triangle", witness_map)


def zero_triangle_to_counting(g: WeightedGraph) -> Structure:
    """Number of distributive triples is |S|^3 - n^3 + #(ordered zero triangles).

    Layout: inf=0, vertices 1..n, then (w,t) for |w| <= 10n, t in {0,1,2}.
    """
    n = g.n
    if g.mask.any() and int(np.abs(g.weights[g.mask]).max()) > n:
        raise WeightOutOfRange("weights must lie in [-n, n]")
    big = 10 * n
    span = 2 * big + 1
    size = 1 + n + 3 * span
    tag = lambda w, t: 1 + n + t * span + (w + big)  # noqa: E731
    w = np.where(g.mask, g.weights, 3 * n + 1)
    np.fill_diagonal(w, 3 * n + 1)
    add = np.full((size, size), INF, dtype=np.int64)
    mul = np.full((size, size), INF, dtype=np.int64)
    verts = slice(1, 1 + n)
    add[verts, verts] = tag(w, 1)
    mul[verts, verts] = tag(w, 2)
    ws = np.arange(-big, big + 1)
    total = ws[:, None] + ws[None, :]
    clamped = np.where(np.abs(total) > big, big, total)
    add[tag(ws, 2)[:, None], tag(ws, 2)[None, :]] = tag(clamped, 0)
    vidx = np.arange(1, 1 + n)
    mul[vidx[:, None], tag(ws, 1)[None, :]] = tag(-ws, 0)[None, :]
    mul[tag(ws, 1)[:, None], vidx[None, :]] = tag(-ws, 0)[:, None]
    return make_structure(size, {"+": add, "*": mul}, {"inf": INF})


# --- squares and Ts -> constant identities -------------------------------

# Each family lists four (matrix, row, col, result) rules for x o_k y; a rule
# returns None for the parity condition when it needs (x + y) even.
_SQ = {
    "f1": [
        (1, lambda x, y: x + y, lambda x, y: x, lambda x, y: y),
        (2, lambda x, y: y - x, lambda x, y: x, lambda x, y: y - x),
        (3, lambda x, y: y, lambda x, y: y - x, lambda x, y: y - x),
        (4, lambda x, y: y - x, lambda x, y: x, lambda x, y: 0 * x),
    ],
    "f2": [
        (1, lambda x, y: x + y, lambda x, y: x, lambda x, y: x + y),
        (2, lambda x, y: y - x, lambda x, y: x, lambda x, y: y - x),
        (3, lambda x, y: x, lambda x, y: x - y, lambda x, y: x - y),
        (4, lambda x, y: x, lambda x, y: y, lambda x, y: 0 * x),
    ],
    "f3": [
        (1, lambda x, y: y, lambda x, y: y - x, lambda x, y: y - x),
        (2, lambda x, y: y - x, lambda x, y: x, lambda x, y: y - x),
        (3, lambda x, y: x, lambda x, y: x - y, lambda x, y: x - y),
        (4, lambda x, y: y, lambda x, y: x, lambda x, y: 0 * x),
    ],
    "f4": [
        (1, lambda x, y: y, lambda x, y: y - x, lambda x, y: y - x),
        (2, lambda x, y: y - x, lambda x, y: x, lambda x, y: y - x),
        (3, lambda x, y: x, lambda x, y: x - y, lambda x, y: x - y),
        (4, lambda x, y: y - x, lambda x, y: x, lambda x, y: 0 * x),
    ],
    "f5": [
        (1, lambda x, y: x, lambda x, y: y, lambda x, y: x + y),
        (2, lambda x, y: x, lambda x, y: y, lambda x, y: x - y),
        (3, lambda x, y: (x + y) // 2, lambda x, y: (x - y) // 2, lambda x, y: (x - y) // 2),
        (4, lambda x, y: y, lambda x, y: x, lambda x, y: 0 * x),
    ],
    "f6": [
        (4, lambda x, y: y - x, lambda x, y: x, lambda x, y: y - x),
        (2, lambda x, y: y, lambda x, y: y - x, lambda x, y: x),
        (3, lambda x, y: x + y, lambda x, y: x, lambda x, y: y + 2 * x),
        (1, lambda x, y: x, lambda x, y: y - x, lambda x, y: 0 * x),
    ],
}
_PARITY = {("f5", 2)}

FAMILY_EXPRESSIONS = {
    "f1": "((a o1 b) o3 (a o2 c)) o4 c",
    "f2": "(a o1 b) o4 ((a o2 c) o3 b)",
    "f3": "(((a o1 b) o2 c) o3 a) o4 b",
    "f4": "(((a o1 b) o2 c) o3 a) o4 c",
    "f5": "((a o1 b) o3 (a o2 c)) o4 a",
    "f6": "(a o1 b) o4 (a o3 (c o2 (a o1 b)))",
}
FAMILY_OPS = ("o1", "o2", "o3", "o4")
SQUARE_FAMILIES = ("f1", "f2", "f3", "f4")
T_FAMILIES = ("f5", "f6")


def family_expression(family: str) -> Expr:
    return parse_expression(FAMILY_EXPRESSIONS[family], FAMILY_OPS)


def pattern_to_triple(family: str, i: int, j: int, k: int) -> tuple:
    """Local (i, j, k) of a square/T -> element values (x_a, x_b, x_c)."""
    if family in ("f1", "f2"):
        return (j, i - j, i + j + k)
    if family in ("f3", "f4"):
        return (i - j, i, i + j + k)
    if family == "f5":
        return (i, j + k, j - k)
    if family == "f6":
        return (j, i + j, i - j + k)
    raise KeyError(family)


def triple_to_pattern(family: str, xa: int, xb: int, xc: int) -> tuple:
    if family in ("f1", "f2"):
        i, j = xb + xa, xa
        return (i, j, xc - i - j)
    if family in ("f3", "f4"):
        i, j = xb, xb - xa
        return (i, j, xc - i - j)
    if family == "f5":
        return (xa, (xb + xc) // 2, (xb - xc) // 2)
    if family == "f6":
        j, i = xa, xb - xa
        return (i, j, xc - i + j)
    raise KeyError(family)


def _to_local(ms):
    """Re-index matrices to 1..n; returns local matrices and the shift."""
    shift = ms[0].offset - 1
    return [BinaryMatrix(m.bits, 1) for m in ms], shift


def _pattern_to_identity(ms, family: str, C: int = SQUARE_C) -> IdentityInstance:
    ms = list(ms)
    if len(ms) != 4:
        raise ValueError("need four matrices")
    shape = ms[0].shape
    if shape[0] != shape[1] or any(m.shape != shape or m.offset != ms[0].offset for m in ms):
        raise ShapeMismatch("matrices must be square with equal shape and offset")
    local, shift = _to_local(ms)
    n = shape[0]
    lo = -C * n
    size = 2 * C * n + 2
    vals = np.arange(lo, -lo + 1)
    x = vals[:, None]
    y = vals[None, :]
    tables = {}
    for k, (mat, row, col, res) in enumerate(_SQ[family]):
        ok = local[mat - 1].lookup(row(x, y), col(x, y))
        if (family, k) in _PARITY:
            ok &= (x + y) % 2 == 0
        r = np.broadcast_to(res(x, y), ok.shape)
        if (np.abs(r[ok]) > C * n).any():
            raise AssertionError("reduction produced an out-of-range value")
        t = np.full((size, size), INF, dtype=np.int64)
        t[1:, 1:] = np.where(ok, r - lo + 1, INF)
        tables[FAMILY_OPS[k]] = t
    s = make_structure(size, tables, {"inf": INF})

    def witness_map(triple):
        xa, xb, xc = (v + lo - 1 for v in triple)
        i, j, k = triple_to_pattern(family, xa, xb, xc)
        return (i + shift, j + shift, k)

    return IdentityInstance(s, ConstantTerm(family_expression(family)), family, witness_map)


def element_of(value: int, n: int, C: int = SQUARE_C) -> int:
    """Element index of an integer value in a square/T structure."""
    return value + C * n + 1


def square_to_identity(M1, M2, M3, M4, family: str = "f1", C: int = SQUARE_C) -> IdentityInstance:
    """The family expression is constant (= inf) iff there is no multichromatic square."""
    if family not in SQUARE_FAMILIES:
        raise ValueError(f"square families are {SQUARE_FAMILIES}")
    return _pattern_to_identity((M1, M2, M3, M4), family, C)


def t_to_identity(M1, M2, M3, M4, family: str = "f5", C: int = SQUARE_C) -> IdentityInstance:
    """The family expression is constant (= inf) iff there is no multichromatic T."""
    if family not in T_FAMILIES:
        raise ValueError(f"T families are {T_FAMILIES}")
    return _pattern_to_identity((M1, M2, M3, M4), family, C)


# --- subexpression embedding ----------------------------------------------


def subexpression_embedding(s: Structure, f: Expr, inf: str = "inf") -> tuple[Structure, Expr]:
    """Pairs (x, t) of an element and a subexpression of f, plus a new absorbing inf.

    The new inf sits at index 0; (x, t) is 1 + x*|T| + index(t).  Constancy of
    f is preserved when the source inf is absorbing.
    """
    if inf not in s.constants:
        raise MissingConstant(f"structure declares no constant {inf!r}")
    s_inf = s.constants[inf]
    subs = subexpressions(f)
    tidx = {t: i for i, t in enumerate(subs)}
    T = len(subs)
    n = s.n
    size = 1 + n * T
    x = np.arange(n)
    tables = {}
    for op in s.ops:
        base = s.table(op).astype(np.int64)
        t = np.full((size, size), INF, dtype=np.int64)
        for t1, i1 in tidx.items():
            for t2, i2 in tidx.items():
                node = Node(op, t1, t2)
                if node not in tidx:
                    continue
                i3 = tidx[node]
                res = np.where(base != s_inf, 1 + base * T + i3, INF)
                rows = 1 + x * T + i1
                cols = 1 + x * T + i2
                t[rows[:, None], cols[None, :]] = res
        tables[op] = t
    consts = {inf: INF}
    return make_structure(size, tables, consts), f


def embedding_element(x: int, t: int, T: int) -> int:
    return 1 + x * T + t
