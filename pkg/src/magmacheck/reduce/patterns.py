"""Reductions between progression, square/T, hyperclique and 4SUM problems."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ..detect import BinaryMatrix, Hypergraph, IntSet
from .behrend import behrend_classes, behrend_partition, shifted_partition

DELTA_C = 8


# --- k-AP colour coding -----------------------------------------------------


def colorize_kap(A: IntSet, k: int, trials: int, seed: int = 0) -> list[list[IntSet]]:
    """Random k-colourings of A; each gives a multichromatic instance."""
    rng = np.random.default_rng(seed)
    members = np.array(A.members, dtype=np.int64)
    out = []
    for _ in range(trials):
        colours = rng.integers(0, k, size=members.size)
        out.append([IntSet(A.N, members[colours == c].tolist()) for c in range(k)])
    return out


def iter_monochromatize_kap(sets: Sequence[IntSet], q: int = 4) -> Iterator[tuple[tuple, IntSet]]:
    """Yield (class tuple, B) with B = union of (A_i restricted to class l_i) + 10 n i.

    Tuples that leave some segment empty cannot contain a k-AP and are skipped.
    """
    k = len(sets)
    n = max(max(s.N for s in sets), 1)
    classes = behrend_classes(n, q)
    keys = sorted(classes, key=lambda c: (sorted(c[0]), c[1]))
    member_sets = [set(s.members) for s in sets]
    hits = []
    for s in member_sets:
        hits.append([(idx, [x for x in classes[key] if x in s]) for idx, key in enumerate(keys)])
        hits[-1] = [(idx, xs) for idx, xs in hits[-1] if xs]
    shift = 10 * n
    for combo in itertools.product(*hits):
        ell = tuple(idx for idx, _ in combo)
        members = [x + i * shift for i, (_, xs) in enumerate(combo) for x in xs]
        yield ell, IntSet(k * shift + n, members)


def monochromatize_kap(sets: Sequence[IntSet], q: int = 4) -> list[IntSet]:
    return [b for _, b in iter_monochromatize_kap(sets, q)]


def mono_to_multi_witness(witness, n: int) -> tuple:
    """A k-AP (b, d) of a monochromatised set -> multichromatic (start, step)."""
    b, d = witness
    shift = 10 * max(n, 1)
    return (b, d - shift)


# --- 4-AP -> squares and Ts ----------------------------------------------


@dataclass
class PatternInstance:
    delta: int
    matrices: tuple
    scale: int
    N: int


class _FormGrid:
    """Values alpha*i + beta*j over a square window, sorted once so each
    delta only needs a range lookup per target."""

    def __init__(self, alpha: int, beta: int, lo: int, hi: int):
        g = np.arange(lo, hi + 1, dtype=np.int64)
        vals = (alpha * g[:, None] + beta * g[None, :]).ravel()
        self.order = np.argsort(vals, kind="stable")
        self.sorted = vals[self.order]
        self.width = g.size
        self.lo = lo

    def ones(self, targets: np.ndarray):
        left = np.searchsorted(self.sorted, targets, side="left")
        right = np.searchsorted(self.sorted, targets, side="right")
        counts = right - left
        if counts.sum() == 0:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        starts = np.repeat(left - np.cumsum(counts) + counts, counts)
        flat = self.order[starts + np.arange(counts.sum())]
        return flat // self.width + self.lo, flat % self.width + self.lo


def _build(lo, hi, grids, forms, scaled, delta):
    size = hi - lo + 1
    out = []
    for grid, (alpha, beta, gamma_fn, src) in zip(grids, forms):
        ii, jj = grid.ones(np.unique(scaled[src] - gamma_fn(delta)))
        out.append(BinaryMatrix.from_ones(size, size, lo, ii, jj))
    return tuple(out)


def _instances(sets, c, factor, forms_fn):
    if len(sets) != 4:
        raise ValueError("need four sets")
    scaled, N = _scaled(sets, factor)
    forms = forms_fn(N)
    lo, hi = -c * N, c * N
    grids = [_FormGrid(a, b, lo, hi) for a, b, _, _ in forms]
    for delta in range(lo, hi + 1):
        yield PatternInstance(delta, _build(lo, hi, grids, forms, scaled, delta), factor, N)


def _scaled(sets, factor):
    n = max(max(s.N for s in sets), 1)
    U = factor * n
    N = math.isqrt(U - 1) + 1 if U > 1 else 1
    return [np.array(s.members, dtype=np.int64) * factor for s in sets], N


def _square_forms(N):
    # (coef of i, coef of j, constant(delta), source set) for P1..P4;
    # P3 and P4 carry the last two progression terms in swapped order
    return [
        (-3, 6 * N, lambda d: 0, 0),
        (N - 2, 4 * N - 2, lambda d: d, 1),
        (3 * N, -6, lambda d: 3 * d, 3),
        (2 * N - 1, 2 * N - 4, lambda d: 2 * d, 2),
    ]


def _t_forms(N):
    return [
        (N + 4, 3, lambda d: 2 * N * d, 2),
        (3 * N, 3, lambda d: 0, 0),
        (6, 3, lambda d: 3 * N * d, 3),
        (2 * N + 2, 3, lambda d: N * d, 1),
    ]


def iter_fourap_to_square(sets: Sequence[IntSet], c: int = DELTA_C) -> Iterator[PatternInstance]:
    """One multichromatic square instance per delta in [-cN, cN]."""
    return _instances(sets, c, 6, _square_forms)


def fourap_to_square(sets: Sequence[IntSet], c: int = DELTA_C) -> list[PatternInstance]:
    return list(iter_fourap_to_square(sets, c))


def iter_fourap_to_T(sets: Sequence[IntSet], c: int = DELTA_C) -> Iterator[PatternInstance]:
    """One multichromatic T instance per delta in [-cN, cN]."""
    return _instances(sets, c, 3, _t_forms)


def fourap_to_T(sets: Sequence[IntSet], c: int = DELTA_C) -> list[PatternInstance]:
    return list(iter_fourap_to_T(sets, c))


def _ap_from_values(vals, scale):
    a = [v // scale for v in vals]
    return (a[0], a[1] - a[0])


def square_witness_to_ap(inst: PatternInstance, witness) -> tuple:
    """(i, j, k) of a square in instance ``inst`` -> 4-AP (start, step)."""
    i, j, k = witness
    vals = []
    for (alpha, beta, gamma_fn, _), (r, cc) in zip(_square_forms(inst.N), ((i, j), (i + k, j), (i + k, j + k), (i, j + k))):
        vals.append(alpha * r + beta * cc + gamma_fn(inst.delta))
    return _ap_from_values(vals, inst.scale)


def t_witness_to_ap(inst: PatternInstance, witness) -> tuple:
    i, j, k = witness
    cells = ((i, j + k), (i, j - k), (i + k, j), (i, j))
    vals = {}
    for r, ((alpha, beta, gamma_fn, _), (x, y)) in enumerate(zip(_t_forms(inst.N), cells)):
        vals[r] = alpha * x + beta * y + gamma_fn(inst.delta)
    # progression order is P2, P4, P1, P3
    return _ap_from_values([vals[1], vals[3], vals[0], vals[2]], inst.scale)


# --- square-free matrices and multi -> mono squares ------------------------


def squarefree_matrices(n: int, q: int = 4) -> list[BinaryMatrix]:
    """n x n matrices (1-based) covering every cell once, each free of squares."""
    i = np.arange(1, n + 1)
    diff = i[:, None] - i[None, :]
    out = []
    for cls in shifted_partition(-n, n, q):
        mask = np.isin(diff, cls)
        if mask.any():
            out.append(BinaryMatrix(mask, 1))
    return out


def iter_multi_to_mono_square(ms: Sequence[BinaryMatrix], q: int = 4) -> Iterator[tuple[tuple, BinaryMatrix]]:
    """Yield (class tuple, 3n x 3n matrix) for the multichromatic-square instance ``ms``.

    Blocks: M1 at (0, 0), M2 at (2n, 0), M3 at (2n, 2n), M4 at (0, 2n), each
    masked by one square-free class.  Tuples with an empty block are skipped
    because such a matrix has no square.
    """
    M1, M2, M3, M4 = ms
    n = M1.rows
    off = M1.offset
    r = np.arange(n)
    diff = r[:, None] - r[None, :]
    classes = [np.isin(diff, cls) for cls in shifted_partition(-n, n, q)]
    blocks = []
    for m in (M1, M2, M3, M4):
        blocks.append([(idx, m.bits & cm) for idx, cm in enumerate(classes) if (m.bits & cm).any()])
    for combo in itertools.product(*blocks):
        big = np.zeros((3 * n, 3 * n), dtype=bool)
        (l1, b1), (l2, b2), (l3, b3), (l4, b4) = combo
        big[:n, :n] = b1
        big[2 * n:, :n] = b2
        big[2 * n:, 2 * n:] = b3
        big[:n, 2 * n:] = b4
        yield (l1, l2, l3, l4), BinaryMatrix(big, off)


def multi_to_mono_square(ms: Sequence[BinaryMatrix], q: int = 4) -> list[BinaryMatrix]:
    return [m for _, m in iter_multi_to_mono_square(ms, q)]


def mono_to_multi_square_witness(witness, n: int) -> tuple:
    i, j, k = witness
    return (i, j, k - 2 * n)


# --- k-AP -> hyperclique -------------------------------------------------


def ruler_base(n: int, k: int) -> int:
    """Least q with q^k > n, so every value in {0..n} has k base-q digits."""
    q = max(2, math.ceil(round((n + 1) ** (1 / k), 9)))
    while q ** k <= n:
        q += 1
    while q > 2 and (q - 1) ** k > n:
        q -= 1
    return q


def ruler_set(n: int, k: int, c: int | None = None) -> np.ndarray:
    """Sorted integers with at most two non-zero base-q digits of size <= c*q.

    The default c = (k-1)^2 is the least constant covering ruler_preimage.
    """
    q = ruler_base(n, k)
    c = (k - 1) ** 2 if c is None else c
    bound = c * q
    digits = np.arange(-bound, bound + 1)
    vals = {0}
    for a, b in itertools.combinations(range(k), 2):
        vals.update((digits[:, None] * q ** a + digits[None, :] * q ** b).ravel().tolist())
    return np.array(sorted(vals), dtype=np.int64)


def _ruler_terms(k: int):
    """Per x_j, two parts (pos, c1, c2, src): the digits d1, d2 of a1, a2 at
    position ``src`` contribute (c1*d1 + c2*d2) * q**pos."""
    terms = [(1, [(0, -(k - 2), k - 1, 0), (1, 0, k - 1, 1)])]
    for j in range(2, k):
        terms.append((j, [(j - 1, (k - 1) * (j - 3), -(k - 1) * (j - 2), j - 1),
                          (j, -(k - 1) * (j - 1), (k - 1) * j, j)]))
    terms.append((k, [(k - 1, (k - 1) * (k - 3), -(k - 1) * (k - 2), k - 1), (0, -1, 0, 0)]))
    return terms


def ruler_preimage(a1: int, a2: int, n: int, k: int) -> list[int]:
    """x with (Mx)_i = a_i for the k-AP starting a1, a2; M_ij = (i - j)/(k - 1)."""
    q = ruler_base(n, k)
    d1 = [(a1 // q ** i) % q for i in range(k)]
    d2 = [(a2 // q ** i) % q for i in range(k)]
    x = []
    for _, parts in _ruler_terms(k):
        x.append(sum((c1 * d1[src] + c2 * d2[src]) * q ** pos for pos, c1, c2, src in parts))
    return x


def ruler_image(n: int, k: int) -> np.ndarray:
    """Every value ruler_preimage can produce; a small subset of ruler_set."""
    q = ruler_base(n, k)
    d = np.arange(q)
    vals = set()
    for _, parts in _ruler_terms(k):
        acc = np.zeros(1, dtype=np.int64)
        # the two parts of a term read different digit positions, so their
        # digit choices are independent
        for pos, c1, c2, src in parts:
            piece = ((c1 * d[:, None] + c2 * d[None, :]) * q ** pos).ravel()
            acc = (acc[:, None] + np.unique(piece)[None, :]).ravel()
            acc = np.unique(acc)
        vals.update(acc.tolist())
    return np.array(sorted(vals), dtype=np.int64)


def apply_ruler_matrix(x: Sequence[int]) -> list:
    k = len(x)
    out = []
    for i in range(1, k + 1):
        num = sum((i - j) * x[j - 1] for j in range(1, k + 1))
        out.append(num // (k - 1) if num % (k - 1) == 0 else num / (k - 1))
    return out


def ap_to_hyperclique(sets: Sequence[IntSet], c: int | None = None) -> Hypergraph:
    """k-partite (k-1)-uniform hypergraph whose k-cliques match multichromatic k-APs.

    Every part is the same set X; the edge omitting part i is present iff
    sum_j (i - j) x_j / (k - 1) lies in A_i.  With ``c`` given, X is the full
    two-digit ruler set with digit bound c*q; by default X is ruler_image,
    which already contains a preimage of every k-AP.
    """
    k = len(sets)
    if k < 3:
        raise ValueError("need k >= 3")
    n = max(max(s.N for s in sets), 1)
    X = ruler_image(n, k) if c is None else ruler_set(n, k, c)
    edges = {}
    for i in range(1, k + 1):
        others = [j for j in range(1, k + 1) if j != i]
        solve = others[-1]
        enum = others[:-1]
        targets = np.array(sets[i - 1].members, dtype=np.int64) * (k - 1)
        if targets.size == 0:
            edges[i - 1] = np.zeros((0, k - 1), dtype=np.int64)
            continue
        grids = np.meshgrid(*[np.arange(X.size)] * len(enum), indexing="ij")
        idx = [g.ravel() for g in grids]
        partial = np.zeros(idx[0].size if idx else 1, dtype=np.int64)
        for j, ix in zip(enum, idx):
            partial += (i - j) * X[ix]
        coef = i - solve
        num = targets[:, None] - partial[None, :]
        ok = num % coef == 0
        xs = num // coef
        pos = np.searchsorted(X, xs)
        pos_c = np.minimum(pos, X.size - 1)
        ok &= X[pos_c] == xs
        t_idx, e_idx = np.nonzero(ok)
        cols = [ix[e_idx] for ix in idx] + [pos_c[t_idx, e_idx]]
        arr = np.stack(cols, axis=1) if cols else np.zeros((0, k - 1), dtype=np.int64)
        arr = np.unique(arr, axis=0)
        edges[i - 1] = arr.astype(np.int64)
    return Hypergraph([X.tolist() for _ in range(k)], edges)


def hyperclique_witness_to_ap(h: Hypergraph, witness) -> tuple:
    x = [h.parts[i][v] for i, v in enumerate(witness)]
    a = apply_ruler_matrix(x)
    return (a[0], a[1] - a[0])


# --- 4-AP -> 4SUM -----------------------------------------------------------


def fourap_to_foursum(sets: Sequence[IntSet]) -> tuple[list[int], ...]:
    """Integers (x + 10n*y) for the planar points (a,2a), (-2a,-3a), (a,0), (0,a)."""
    if len(sets) != 4:
        raise ValueError("need four sets")
    n = max(max(s.N for s in sets), 1)
    L = 10 * n
    A1, A2, A3, A4 = (s.members for s in sets)
    return (
        [a + 2 * a * L for a in A1],
        [-2 * a - 3 * a * L for a in A2],
        [a for a in A3],
        [a * L for a in A4],
    )


def foursum_points(sets: Sequence[IntSet]) -> tuple[list[tuple[int, int]], ...]:
    A1, A2, A3, A4 = (s.members for s in sets)
    return ([(a, 2 * a) for a in A1], [(-2 * a, -3 * a) for a in A2], [(a, 0) for a in A3], [(0, a) for a in A4])


def foursum_witness_to_ap(sets: Sequence[IntSet], witness) -> tuple:
    n = max(max(s.N for s in sets), 1)
    L = 10 * n
    a1 = witness[0] // (1 + 2 * L)
    a2 = -witness[1] // (2 + 3 * L)
    return (a1, a2 - a1)
