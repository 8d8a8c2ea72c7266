"""Brute-force detectors for the pattern problems used by the reductions.

Every detector returns the lexicographically least witness or None, and
has a matching ``check_*`` function validating a claimed witness.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import MagmaError, ParseError


class ShapeMismatch(MagmaError):
    pass


# --- instance types --------------------------------------------------------


@dataclass(frozen=True)
class IntSet:
    """A subset of {0..N}; members are kept sorted and unique."""

    N: int
    members: tuple

    def __init__(self, N: int, members: Iterable[int]):
        ms = tuple(sorted(set(int(m) for m in members)))
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "members", ms)

    def __contains__(self, x):
        return x in self._lookup

    @property
    def _lookup(self):
        cache = self.__dict__.get("_set")
        if cache is None:
            cache = frozenset(self.members)
            object.__setattr__(self, "_set", cache)
        return cache

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


class BinaryMatrix:
    """0/1 matrix addressed by integer coordinates starting at ``offset``.

    Entry (i, j) lives at bits[i - offset, j - offset]; queries outside the
    stored window return 0.  The default offset of 1 gives 1-based indices.
    """

    __slots__ = ("bits", "offset", "_ones")

    def __init__(self, bits, offset: int = 1):
        b = np.array(bits, dtype=bool)
        if b.ndim != 2:
            raise ShapeMismatch("matrix must be two-dimensional")
        b.setflags(write=False)
        self.bits = b
        self.offset = int(offset)
        self._ones = None

    @classmethod
    def from_ones(cls, rows: int, cols: int, offset: int, ii, jj) -> "BinaryMatrix":
        bits = np.zeros((rows, cols), dtype=bool)
        ii = np.asarray(ii, dtype=np.int64) - offset
        jj = np.asarray(jj, dtype=np.int64) - offset
        bits[ii, jj] = True
        bits.setflags(write=False)
        m = cls.__new__(cls)
        m.bits, m.offset = bits, int(offset)
        # the coordinates are already known; skip the dense nonzero scan
        flat = np.unique(ii * cols + jj)
        m._ones = (flat // cols + offset, flat % cols + offset)
        return m

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self):
        return self.bits.shape

    def get(self, i: int, j: int) -> int:
        r, c = i - self.offset, j - self.offset
        if 0 <= r < self.rows and 0 <= c < self.cols:
            return int(self.bits[r, c])
        return 0

    def __getitem__(self, ij):
        return self.get(*ij)

    def lookup(self, ii, jj) -> np.ndarray:
        """Vectorised get."""
        r = np.asarray(ii, dtype=np.int64) - self.offset
        c = np.asarray(jj, dtype=np.int64) - self.offset
        ok = (r >= 0) & (r < self.rows) & (c >= 0) & (c < self.cols)
        out = np.zeros(np.broadcast(r, c).shape, dtype=bool)
        rr, cc = np.broadcast_arrays(r, c)
        out[ok] = self.bits[rr[ok], cc[ok]]
        return out

    def ones(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates of the 1-entries, row-major order."""
        if self._ones is None:
            r, c = np.nonzero(self.bits)
            self._ones = (r + self.offset, c + self.offset)
        return self._ones

    def transpose(self) -> "BinaryMatrix":
        return BinaryMatrix(self.bits.T, self.offset)

    def __eq__(self, other):
        return (isinstance(other, BinaryMatrix) and self.offset == other.offset
                and np.array_equal(self.bits, other.bits))

    def __repr__(self):
        return f"BinaryMatrix({self.rows}x{self.cols}, offset={self.offset}, ones={int(self.bits.sum())})"


@dataclass
class WeightedTripartite:
    """Three n x n weight tables; ``mask`` marks present edges.

    w_xy[x, y], w_yz[y, z], w_zx[z, x].  All present weights satisfy |w| <= M.
    """

    w_xy: np.ndarray
    w_yz: np.ndarray
    w_zx: np.ndarray
    m_xy: np.ndarray
    m_yz: np.ndarray
    m_zx: np.ndarray
    M: int

    @property
    def n(self) -> int:
        return self.w_xy.shape[0]

    @classmethod
    def from_graph(cls, g: "WeightedGraph") -> "WeightedTripartite":
        w, m = g.weights, g.mask
        bound = int(np.abs(w[m]).max()) if m.any() else 0
        return cls(w.copy(), w.copy(), w.copy(), m.copy(), m.copy(), m.copy(), bound)


@dataclass
class WeightedGraph:
    """Undirected graph on 0..n-1 with integer edge weights; no self loops."""

    weights: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.int64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if not (np.array_equal(self.mask, self.mask.T)
                and np.array_equal(np.where(self.mask, self.weights, 0), np.where(self.mask, self.weights, 0).T)):
            raise ValueError("graph must be undirected")
        if np.diag(self.mask).any():
            raise ValueError("self loops are not allowed")

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def has_edge(self, u, v) -> bool:
        return bool(self.mask[u, v])

    def weight(self, u, v) -> int:
        return int(self.weights[u, v])


@dataclass
class Hypergraph:
    """k-partite (k-1)-uniform hypergraph.

    ``parts[i]`` holds vertex labels of part i.  ``edges[i]`` is an int array
    of shape (m, k-1): vertex indices for the parts other than i, in
    increasing part order.
    """

    parts: list
    edges: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.parts)

    def edge_set(self, i: int) -> set:
        return set(map(tuple, np.asarray(self.edges.get(i, np.zeros((0, self.k - 1), int))).tolist()))


# --- arithmetic progressions ----------------------------------------------


def detect_kap(A: IntSet | Iterable[int], k: int):
    """Least (start, step) with step > 0 and start + i*step in A for i < k."""
    members = sorted(set(A))
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return None  # needs a positive step; single elements have none by convention
    if not members:
        return None
    lo, hi = members[0], members[-1]
    present = np.zeros(hi - lo + 1, dtype=bool)
    present[np.array(members) - lo] = True
    arr = np.array(members)
    for a in members:
        steps = arr[arr > a] - a
        if steps.size == 0:
            continue
        ok = np.ones(steps.size, dtype=bool)
        for i in range(2, k):
            pos = a + i * steps - lo
            inside = pos <= hi - lo
            ok &= inside
            ok[inside] &= present[pos[inside]]
        if ok.any():
            return (a, int(steps[ok].min()))
    return None


def check_kap(A, k: int, witness) -> bool:
    s = set(A)
    a, d = witness
    return d > 0 and all(a + i * d in s for i in range(k))


def detect_multichromatic_kap(sets: Sequence) -> tuple | None:
    """Least (start, step) with start + i*step in A_{i+1}; any step is allowed."""
    sets = [sorted(set(x)) for x in sets]
    if not sets or any(len(x) == 0 for x in sets):
        return None
    k = len(sets)
    if k == 1:
        return (sets[0][0], 0)
    lookups = [set(x) for x in sets]
    a1 = np.array(sets[0])
    a2 = np.array(sets[1])
    best = None
    for a in a1.tolist():
        steps = a2 - a
        ok = np.ones(steps.size, dtype=bool)
        for i in range(2, k):
            vals = a + i * steps
            ok &= np.fromiter((v in lookups[i] for v in vals.tolist()), bool, vals.size)
        if ok.any():
            best = (a, int(steps[ok].min()))
            break
    return best


def check_multichromatic_kap(sets, witness) -> bool:
    a, d = witness
    return all(a + i * d in set(s) for i, s in enumerate(sets))


# --- squares and Ts ---------------------------------------------------------


def _same_frame(ms: Sequence[BinaryMatrix]):
    shape, off = ms[0].shape, ms[0].offset
    for m in ms[1:]:
        if m.shape != shape or m.offset != off:
            raise ShapeMismatch("matrices must share shape and offset")


def _column_join(first: BinaryMatrix, second: BinaryMatrix):
    """All (i, j, k) with first(i, j) = second(i + k, j) = 1."""
    r1, c1 = first.ones()
    r2, c2 = second.ones()
    if r1.size == 0 or r2.size == 0:
        return np.zeros((0, 3), dtype=np.int64)
    by_col = defaultdict(list)
    for r, c in zip(r2.tolist(), c2.tolist()):
        by_col[c].append(r)
    out_i, out_j, out_k = [], [], []
    order = np.argsort(c1, kind="stable")
    r1s, c1s = r1[order], c1[order]
    bounds = np.flatnonzero(np.diff(c1s)) + 1
    for start, stop in zip(np.r_[0, bounds], np.r_[bounds, c1s.size]):
        col = int(c1s[start])
        rows2 = by_col.get(col)
        if not rows2:
            continue
        rows1 = r1s[start:stop]
        rr2 = np.array(rows2)
        ii = np.repeat(rows1, rr2.size)
        kk = np.tile(rr2, rows1.size) - ii
        out_i.append(ii)
        out_j.append(np.full(ii.size, col))
        out_k.append(kk)
    if not out_i:
        return np.zeros((0, 3), dtype=np.int64)
    return np.stack([np.concatenate(out_i), np.concatenate(out_j), np.concatenate(out_k)], axis=1)


def _least(cands: np.ndarray):
    if cands.size == 0:
        return None
    order = np.lexsort((cands[:, 2], cands[:, 1], cands[:, 0]))
    return tuple(int(v) for v in cands[order[0]])


def detect_multichromatic_square(M1, M2, M3, M4):
    """Least (i, j, k) with M1(i,j) = M2(i+k,j) = M3(i+k,j+k) = M4(i,j+k) = 1."""
    _same_frame([M1, M2, M3, M4])
    c = _column_join(M1, M2)
    if c.size == 0:
        return None
    i, j, k = c[:, 0], c[:, 1], c[:, 2]
    keep = M3.lookup(i + k, j + k) & M4.lookup(i, j + k)
    return _least(c[keep])


def check_multichromatic_square(M1, M2, M3, M4, witness) -> bool:
    i, j, k = witness
    return bool(M1.get(i, j) and M2.get(i + k, j) and M3.get(i + k, j + k) and M4.get(i, j + k))


def detect_square(M: BinaryMatrix):
    """Least (i, j, k), k > 0, with M(i,j) = M(i+k,j) = M(i+k,j+k) = M(i,j+k) = 1."""
    c = _column_join(M, M)
    if c.size == 0:
        return None
    c = c[c[:, 2] > 0]
    i, j, k = c[:, 0], c[:, 1], c[:, 2]
    keep = M.lookup(i + k, j + k) & M.lookup(i, j + k)
    return _least(c[keep])


def check_square(M, witness) -> bool:
    return witness[2] > 0 and check_multichromatic_square(M, M, M, M, witness)


def detect_multichromatic_T(M1, M2, M3, M4):
    """Least (i, j, k) with M1(i,j+k) = M2(i,j-k) = M3(i+k,j) = M4(i,j) = 1."""
    _same_frame([M1, M2, M3, M4])
    c = _column_join(M4, M3)
    if c.size == 0:
        return None
    i, j, k = c[:, 0], c[:, 1], c[:, 2]
    keep = M1.lookup(i, j + k) & M2.lookup(i, j - k)
    return _least(c[keep])


def check_multichromatic_T(M1, M2, M3, M4, witness) -> bool:
    i, j, k = witness
    return bool(M1.get(i, j + k) and M2.get(i, j - k) and M3.get(i + k, j) and M4.get(i, j))


def squares_bruteforce(M1, M2, M3, M4, t_shape: bool = False):
    """Reference enumeration over all (i, j, k) in the window; used by tests."""
    rows = M1.rows
    lo = M1.offset
    out = []
    for i in range(lo, lo + rows):
        for j in range(lo, lo + rows):
            for k in range(-rows, rows + 1):
                w = (i, j, k)
                ok = check_multichromatic_T(M1, M2, M3, M4, w) if t_shape else \
                    check_multichromatic_square(M1, M2, M3, M4, w)
                if ok:
                    out.append(w)
    return min(out) if out else None


# --- graphs -----------------------------------------------------------------


def detect_triangle(adj) -> tuple | None:
    """Least (u, v, w), u < v < w, pairwise adjacent."""
    a = np.asarray(adj, dtype=bool)
    n = a.shape[0]
    ai = a.astype(np.int64)
    common = (ai @ ai) * ai  # common[u, v] > 0 iff edge uv lies on a triangle
    for u in range(n):
        for v in np.flatnonzero(a[u, u + 1:]) + u + 1:
            if common[u, v]:
                ws = np.flatnonzero(a[u] & a[v])
                ws = ws[ws > v]
                if ws.size:
                    return (u, int(v), int(ws[0]))
    return None


def check_triangle(adj, witness) -> bool:
    a = np.asarray(adj, dtype=bool)
    u, v, w = witness
    return len({u, v, w}) == 3 and bool(a[u, v] and a[v, w] and a[u, w])


def detect_zero_triangle(g: WeightedTripartite):
    """Least (x, y, z) with all three edges present and w_xy + w_yz + w_zx = 0."""
    for x in range(g.n):
        tot = g.w_xy[x][:, None] + g.w_yz + g.w_zx[:, x][None, :]
        ok = g.m_xy[x][:, None] & g.m_yz & g.m_zx[:, x][None, :] & (tot == 0)
        if ok.any():
            y, z = np.argwhere(ok)[0]
            return (x, int(y), int(z))
    return None


def check_zero_triangle(g: WeightedTripartite, witness) -> bool:
    x, y, z = witness
    if not (g.m_xy[x, y] and g.m_yz[y, z] and g.m_zx[z, x]):
        return False
    return int(g.w_xy[x, y] + g.w_yz[y, z] + g.w_zx[z, x]) == 0


def detect_zero_triangle_graph(g: WeightedGraph):
    """Least u < v < w forming a triangle of total weight 0."""
    n = g.n
    for u in range(n):
        for v in range(u + 1, n):
            if not g.mask[u, v]:
                continue
            ws = np.arange(v + 1, n)
            ok = g.mask[u, ws] & g.mask[v, ws] & (g.weights[u, v] + g.weights[u, ws] + g.weights[v, ws] == 0)
            if ok.any():
                return (u, v, int(ws[ok][0]))
    return None


# --- hypercliques and 4SUM -------------------------------------------------


def _encode(cols: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    key = np.zeros(cols.shape[0], dtype=np.int64)
    for c, sz in zip(cols.T, sizes):
        key = key * sz + c
    return key


def detect_hyperclique(h: Hypergraph):
    """Least tuple (v_1..v_k) of vertex indices, one per part, all of whose
    (k-1)-subsets are edges.  Joins two edge lists then filters by the rest."""
    k = h.k
    if k < 3:
        raise ValueError("need k >= 3")
    sizes = [len(p) for p in h.parts]
    e_last = np.asarray(h.edges.get(k - 1, np.zeros((0, k - 1))), dtype=np.int64).reshape(-1, k - 1)
    e_prev = np.asarray(h.edges.get(k - 2, np.zeros((0, k - 1))), dtype=np.int64).reshape(-1, k - 1)
    if e_last.size == 0 or e_prev.size == 0:
        return None
    # e_last covers parts 0..k-2; e_prev covers parts 0..k-3 and k-1
    shared = k - 2
    key_last = _encode(e_last[:, :shared], sizes[:shared])
    key_prev = _encode(e_prev[:, :shared], sizes[:shared])
    order = np.argsort(key_prev, kind="stable")
    kp = key_prev[order]
    left = np.searchsorted(kp, key_last, side="left")
    right = np.searchsorted(kp, key_last, side="right")
    counts = right - left
    if counts.sum() == 0:
        return None
    rows = np.repeat(np.arange(e_last.shape[0]), counts)
    starts = np.repeat(left, counts)
    within = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    partner = order[starts + within]
    full = np.concatenate([e_last[rows], e_prev[partner][:, -1:]], axis=1)
    keep = np.ones(full.shape[0], dtype=bool)
    for omit in range(k - 2):
        cols = [c for c in range(k) if c != omit]
        edges = np.asarray(h.edges.get(omit, np.zeros((0, k - 1))), dtype=np.int64).reshape(-1, k - 1)
        if edges.size == 0:
            return None
        sz = [sizes[c] for c in cols]
        keep &= np.isin(_encode(full[:, cols], sz), _encode(edges, sz))
    full = full[keep]
    if full.size == 0:
        return None
    order = np.lexsort(full.T[::-1])
    return tuple(int(v) for v in full[order[0]])


def detect_hyperclique_bruteforce(h: Hypergraph):
    sets = {i: h.edge_set(i) for i in range(h.k)}
    for combo in itertools.product(*[range(len(p)) for p in h.parts]):
        if all(tuple(combo[:i] + combo[i + 1:]) in sets[i] for i in range(h.k)):
            return combo
    return None


def check_hyperclique(h: Hypergraph, witness) -> bool:
    return all(tuple(witness[:i]) + tuple(witness[i + 1:]) in h.edge_set(i) for i in range(h.k))


def detect_foursum(B1, B2, B3, B4):
    """Least (b1, b2, b3, b4) in B1 x ... x B4 with b1 + b2 + b3 + b4 = 0."""
    pairs = defaultdict(list)
    for b3 in sorted(set(B3)):
        for b4 in sorted(set(B4)):
            pairs[b3 + b4].append((b3, b4))
    for b1 in sorted(set(B1)):
        for b2 in sorted(set(B2)):
            hit = pairs.get(-(b1 + b2))
            if hit:
                return (b1, b2) + hit[0]
    return None


def check_foursum(B1, B2, B3, B4, witness) -> bool:
    b = witness
    return b[0] in set(B1) and b[1] in set(B2) and b[2] in set(B3) and b[3] in set(B4) and sum(b) == 0


# --- file formats -----------------------------------------------------------


def _lines(text: str) -> list[str]:
    out = text.split("\n")
    if out and out[-1] == "":
        out.pop()
    return [ln.rstrip("\r") for ln in out]


def _kv(line: str, lineno: int) -> dict:
    out = {}
    for part in line.split():
        key, eq, val = part.partition("=")
        if not eq:
            raise ParseError(f"expected key=value, got {part!r}", lineno)
        try:
            out[key] = int(val)
        except ValueError:
            out[key] = val
    return out


def format_intsets(sets: Sequence[IntSet]) -> str:
    N = max((s.N for s in sets), default=0)
    lines = ["intset v1", f"N={N} count={len(sets)}"]
    lines += [" ".join(str(m) for m in s.members) for s in sets]
    return "\n".join(lines) + "\n"


def parse_intsets(text: str) -> list[IntSet]:
    lines = _lines(text)
    if not lines or lines[0].strip() != "intset v1":
        raise ParseError("missing 'intset v1' header", 1)
    if len(lines) < 2:
        raise ParseError("missing size line", 2)
    hdr = _kv(lines[1], 2)
    if "N" not in hdr:
        raise ParseError("missing N=", 2)
    N = hdr["N"]
    count = hdr.get("count", 1)
    body = lines[2:]
    if len(body) < count:
        body = body + [""] * (count - len(body))
    sets = []
    for idx, ln in enumerate(body[:count]):
        try:
            vals = [int(v) for v in ln.split()]
        except ValueError:
            raise ParseError("non-integer member", idx + 3) from None
        if any(v < 0 or v > N for v in vals):
            raise ParseError(f"member outside 0..{N}", idx + 3)
        sets.append(IntSet(N, vals))
    return sets


def format_intlists(lists: Sequence[Sequence[int]]) -> str:
    """Integer lists with arbitrary signs, as used by 4SUM instances."""
    lines = ["intlist v1", f"count={len(lists)}"]
    lines += [" ".join(str(int(v)) for v in xs) for xs in lists]
    return "\n".join(lines) + "\n"


def parse_intlists(text: str) -> list[list[int]]:
    lines = _lines(text)
    if not lines or lines[0].strip() != "intlist v1":
        raise ParseError("missing 'intlist v1' header", 1)
    count = _kv(lines[1], 2).get("count", 0) if len(lines) > 1 else 0
    body = lines[2:] + [""] * max(0, count - len(lines) + 2)
    out = []
    for idx, ln in enumerate(body[:count]):
        try:
            out.append([int(v) for v in ln.split()])
        except ValueError:
            raise ParseError("non-integer entry", idx + 3) from None
    return out


def format_bitmats(ms: Sequence[BinaryMatrix]) -> str:
    rows, cols = ms[0].shape
    lines = ["bitmat v1", f"rows={rows} cols={cols} offset={ms[0].offset} count={len(ms)}"]
    for m in ms:
        lines += ["".join("1" if b else "0" for b in row) for row in m.bits]
    return "\n".join(lines) + "\n"


def parse_bitmats(text: str) -> list[BinaryMatrix]:
    lines = _lines(text)
    if not lines or lines[0].strip() != "bitmat v1":
        raise ParseError("missing 'bitmat v1' header", 1)
    hdr = _kv(lines[1], 2)
    rows, cols = hdr["rows"], hdr["cols"]
    offset, count = hdr.get("offset", 1), hdr.get("count", 1)
    out = []
    pos = 2
    for _ in range(count):
        block = []
        for _ in range(rows):
            if pos >= len(lines):
                raise ParseError("matrix is truncated", pos + 1)
            ln = lines[pos].strip()
            if len(ln) != cols or set(ln) - {"0", "1"}:
                raise ParseError(f"expected {cols} characters of 0/1", pos + 1)
            block.append([ch == "1" for ch in ln])
            pos += 1
        out.append(BinaryMatrix(np.array(block, dtype=bool).reshape(rows, cols), offset))
    return out


def _format_table(w, m):
    return [" ".join(str(int(v)) if ok else "." for v, ok in zip(wr, mr)) for wr, mr in zip(w, m)]


def _parse_table(lines, start, n):
    w = np.zeros((n, n), dtype=np.int64)
    m = np.zeros((n, n), dtype=bool)
    for r in range(n):
        if start + r >= len(lines):
            raise ParseError("table is truncated", start + r + 1)
        parts = lines[start + r].split()
        if len(parts) != n:
            raise ParseError(f"expected {n} entries", start + r + 1)
        for c, tok in enumerate(parts):
            if tok == ".":
                continue
            try:
                w[r, c] = int(tok)
            except ValueError:
                raise ParseError(f"bad weight {tok!r}", start + r + 1) from None
            m[r, c] = True
    return w, m


def format_tripartite(g: WeightedTripartite) -> str:
    lines = ["tripartite v1", f"n={g.n} M={g.M}"]
    for w, m in ((g.w_xy, g.m_xy), (g.w_yz, g.m_yz), (g.w_zx, g.m_zx)):
        lines += _format_table(w, m)
    return "\n".join(lines) + "\n"


def parse_tripartite(text: str) -> WeightedTripartite:
    lines = _lines(text)
    if not lines or lines[0].strip() != "tripartite v1":
        raise ParseError("missing 'tripartite v1' header", 1)
    hdr = _kv(lines[1], 2)
    n = hdr["n"]
    tabs = [_parse_table(lines, 2 + t * n, n) for t in range(3)]
    return WeightedTripartite(tabs[0][0], tabs[1][0], tabs[2][0], tabs[0][1], tabs[1][1], tabs[2][1],
                              hdr.get("M", 0))


def format_wgraph(g: WeightedGraph) -> str:
    return "\n".join(["wgraph v1", f"n={g.n}"] + _format_table(g.weights, g.mask)) + "\n"


def parse_wgraph(text: str) -> WeightedGraph:
    lines = _lines(text)
    if not lines or lines[0].strip() != "wgraph v1":
        raise ParseError("missing 'wgraph v1' header", 1)
    n = _kv(lines[1], 2)["n"]
    w, m = _parse_table(lines, 2, n)
    return WeightedGraph(w, m)


def format_hypergraph(h: Hypergraph) -> str:
    lines = ["hypergraph v1", f"k={h.k}"]
    for i, part in enumerate(h.parts):
        lines.append(f"part {i} " + " ".join(str(v) for v in part))
    for i in range(h.k):
        for e in np.asarray(h.edges.get(i, np.zeros((0, h.k - 1), int))).tolist():
            lines.append(f"edge {i} " + " ".join(str(v) for v in e))
    return "\n".join(lines) + "\n"


def parse_hypergraph(text: str) -> Hypergraph:
    lines = _lines(text)
    if not lines or lines[0].strip() != "hypergraph v1":
        raise ParseError("missing 'hypergraph v1' header", 1)
    k = _kv(lines[1], 2)["k"]
    parts: list = [[] for _ in range(k)]
    edges: dict = {i: [] for i in range(k)}
    for no, ln in enumerate(lines[2:], start=3):
        toks = ln.split()
        if not toks:
            continue
        try:
            vals = [int(t) for t in toks[1:]]
        except ValueError:
            raise ParseError("non-integer token", no) from None
        if toks[0] == "part":
            parts[vals[0]] = vals[1:]
        elif toks[0] == "edge":
            if len(vals) != k:
                raise ParseError(f"edge needs {k - 1} vertices", no)
            edges[vals[0]].append(vals[1:])
        else:
            raise ParseError(f"unknown record {toks[0]!r}", no)
    return Hypergraph(parts, {i: np.array(e, dtype=np.int64).reshape(-1, k - 1) for i, e in edges.items()})


def read_text(path) -> str:
    return Path(path).read_text()
