import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import random_graph, random_matrices, random_weighted_graph
from magmacheck.core import ParseError
from magmacheck.detect import (
    BinaryMatrix,
    Hypergraph,
    IntSet,
    ShapeMismatch,
    WeightedTripartite,
    check_foursum,
    check_hyperclique,
    check_kap,
    check_multichromatic_kap,
    check_multichromatic_square,
    check_multichromatic_T,
    check_square,
    check_triangle,
    check_zero_triangle,
    detect_foursum,
    detect_hyperclique,
    detect_kap,
    detect_multichromatic_kap,
    detect_multichromatic_square,
    detect_multichromatic_T,
    detect_square,
    detect_triangle,
    detect_zero_triangle,
    detect_zero_triangle_graph,
    format_bitmats,
    format_hypergraph,
    format_intlists,
    format_intsets,
    format_tripartite,
    format_wgraph,
    parse_bitmats,
    parse_hypergraph,
    parse_intlists,
    parse_intsets,
    parse_tripartite,
    parse_wgraph,
)


# --- plain oracles ----------------------------------------------------------


def kap_oracle(A, k):
    A = set(A)
    hits = [(a, d) for a in sorted(A) for d in range(1, max(A, default=0) + 1)
            if all(a + i * d in A for i in range(k))]
    return min(hits) if hits else None


def multi_kap_oracle(sets):
    hits = [(a, b - a) for a in sets[0] for b in sets[1]
            if all(a + i * (b - a) in set(s) for i, s in enumerate(sets))]
    return min(hits) if hits else None


def square_oracle(ms, t_shape=False, mono=False):
    M1, M2, M3, M4 = ms
    lo, n = M1.offset, M1.rows
    hits = []
    for i, j in itertools.product(range(lo, lo + n), repeat=2):
        for k in range(-n, n + 1):
            if t_shape:
                ok = M1[i, j + k] and M2[i, j - k] and M3[i + k, j] and M4[i, j]
            else:
                ok = M1[i, j] and M2[i + k, j] and M3[i + k, j + k] and M4[i, j + k]
            if ok and (k > 0 or not mono):
                hits.append((i, j, k))
    return min(hits) if hits else None


# --- arithmetic progressions ---------------------------------------------------


def test_kap_examples():
    assert detect_kap(IntSet(7, [1, 3, 5, 7]), 4) == (1, 2)
    assert detect_kap(IntSet(4, [0, 1, 2, 4]), 4) is None
    assert detect_kap(IntSet(5, [5]), 4) is None


def test_multichromatic_kap_examples():
    assert detect_multichromatic_kap([IntSet(3, [3])] * 4) == (3, 0)
    assert detect_multichromatic_kap([IntSet(4, [v]) for v in (0, 1, 2, 4)]) is None
    assert detect_multichromatic_kap([IntSet(3, [v]) for v in (3, 2, 1, 0)]) == (3, -1)


small_sets = st.lists(st.integers(0, 40), max_size=12)


@settings(max_examples=150, deadline=None)
@given(small_sets, st.integers(3, 6))
def test_kap_matches_oracle_and_prefix(A, k):
    got = detect_kap(A, k)
    assert got == kap_oracle(A, k)
    if got is not None:
        assert check_kap(A, k, got)
        for k2 in range(3, k + 1):
            assert check_kap(A, k2, got)
            assert detect_kap(A, k2) is not None


@settings(max_examples=150, deadline=None)
@given(st.lists(st.lists(st.integers(0, 20), min_size=1, max_size=6), min_size=3, max_size=5))
def test_multichromatic_kap_matches_oracle(sets):
    got = detect_multichromatic_kap(sets)
    assert got == multi_kap_oracle(sets)
    if got is not None:
        assert check_multichromatic_kap(sets, got)


# --- squares and Ts ------------------------------------------------------------


def test_square_examples():
    assert detect_square(BinaryMatrix(np.ones((2, 2)))) == (1, 1, 1)
    assert detect_square(BinaryMatrix(np.eye(2))) is None
    one = BinaryMatrix(np.ones((1, 1)))
    assert detect_multichromatic_square(one, one, one, one) == (1, 1, 0)


def test_T_examples():
    one = BinaryMatrix(np.ones((1, 1)))
    zero = BinaryMatrix(np.zeros((1, 1)))
    assert detect_multichromatic_T(one, one, one, one) == (1, 1, 0)
    assert detect_multichromatic_T(one, one, one, zero) is None
    cells = {1: (1, 3), 2: (1, 1), 3: (2, 2), 4: (1, 2)}
    ms = []
    for idx in range(1, 5):
        b = np.zeros((3, 3), bool)
        i, j = cells[idx]
        b[i - 1, j - 1] = True
        ms.append(BinaryMatrix(b))
    assert detect_multichromatic_T(*ms) == (1, 2, 1)


def test_shape_mismatch():
    a = BinaryMatrix(np.ones((2, 2)))
    b = BinaryMatrix(np.ones((3, 3)))
    with pytest.raises(ShapeMismatch):
        detect_multichromatic_square(a, a, a, b)
    with pytest.raises(ShapeMismatch):
        detect_multichromatic_T(a, a, BinaryMatrix(np.ones((2, 2)), offset=0), a)


def test_offset_addressing():
    m = BinaryMatrix(np.eye(3), offset=-1)
    assert m[-1, -1] == 1 and m[1, 1] == 1 and m[2, 2] == 0 and m[-2, -2] == 0
    assert m.lookup([-1, 0, 5], [-1, 1, 5]).tolist() == [True, False, False]
    f = BinaryMatrix.from_ones(3, 3, -1, [1, -1, 1], [0, -1, 0])
    assert f.bits.sum() == 2 and f[1, 0] == 1
    assert [x.tolist() for x in f.ones()] == [x.tolist() for x in BinaryMatrix(f.bits, -1).ones()]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 7), st.integers(-2, 2))
def test_square_detectors_match_oracle(seed, n, offset):
    rng = np.random.default_rng(seed)
    ms = [BinaryMatrix(m.bits, offset) for m in random_matrices(rng, n)]
    got = detect_multichromatic_square(*ms)
    assert got == square_oracle(ms)
    if got is not None:
        assert check_multichromatic_square(*ms, got)
    got = detect_multichromatic_T(*ms)
    assert got == square_oracle(ms, t_shape=True)
    if got is not None:
        assert check_multichromatic_T(*ms, got)
    got = detect_square(ms[0])
    assert got == square_oracle([ms[0]] * 4, mono=True)
    if got is not None:
        assert got[2] > 0 and check_square(ms[0], got)


# --- graphs ----------------------------------------------------------------------


def test_triangle_examples():
    k3 = np.ones((3, 3), bool) & ~np.eye(3, dtype=bool)
    assert detect_triangle(k3) == (0, 1, 2)
    p3 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], bool)
    assert detect_triangle(p3) is None


def test_zero_triangle_example():
    z = np.zeros((2, 2), np.int64)
    f = np.zeros((2, 2), bool)
    wxy, wyz, wzx = z.copy(), z.copy(), z.copy()
    mxy, myz, mzx = f.copy(), f.copy(), f.copy()
    wxy[1, 0], wyz[0, 1], wzx[1, 1] = 2, -3, 1
    mxy[1, 0], myz[0, 1], mzx[1, 1] = True, True, True
    g = WeightedTripartite(wxy, wyz, wzx, mxy, myz, mzx, 3)
    assert detect_zero_triangle(g) == (1, 0, 1)
    wzx[1, 1] = 2
    assert detect_zero_triangle(g) is None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 12))
def test_triangle_matches_oracle(seed, n):
    adj = random_graph(np.random.default_rng(seed), n)
    hits = [t for t in itertools.combinations(range(n), 3)
            if adj[t[0], t[1]] and adj[t[1], t[2]] and adj[t[0], t[2]]]
    got = detect_triangle(adj)
    assert got == (hits[0] if hits else None)
    if got is not None:
        assert check_triangle(adj, got)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 9))
def test_zero_triangle_matches_oracle(seed, n):
    g = random_weighted_graph(np.random.default_rng(seed), n)
    hits = [t for t in itertools.combinations(range(n), 3)
            if all(g.mask[a, b] for a, b in itertools.combinations(t, 2))
            and sum(g.weights[a, b] for a, b in itertools.combinations(t, 2)) == 0]
    assert detect_zero_triangle_graph(g) == (hits[0] if hits else None)
    tp = WeightedTripartite.from_graph(g)
    w = detect_zero_triangle(tp)
    if w is not None:
        assert check_zero_triangle(tp, w)
    # tripartite copies of an undirected graph: every zero triangle shows up
    assert (w is None) == (not hits and not any(
        g.mask[x, y] and g.mask[y, z] and g.mask[z, x]
        and g.weights[x, y] + g.weights[y, z] + g.weights[z, x] == 0
        for x, y, z in itertools.product(range(n), repeat=3)))


# --- hypercliques and 4SUM --------------------------------------------------------


def full_hypergraph(k, sizes):
    parts = [list(range(s)) for s in sizes]
    edges = {}
    for i in range(k):
        rng = [range(sizes[c]) for c in range(k) if c != i]
        edges[i] = np.array(list(itertools.product(*rng)), dtype=np.int64).reshape(-1, k - 1)
    return Hypergraph(parts, edges)


def test_hyperclique_examples():
    h = full_hypergraph(4, [1, 1, 1, 1])
    assert detect_hyperclique(h) == (0, 0, 0, 0)
    h.edges[2] = h.edges[2][:0]
    assert detect_hyperclique(h) is None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(3, 5))
def test_hyperclique_matches_oracle(seed, k):
    rng = np.random.default_rng(seed)
    sizes = [int(v) for v in rng.integers(1, 4, k)]
    h = full_hypergraph(k, sizes)
    keep = rng.uniform(0.3, 1.0)
    for i in range(k):
        h.edges[i] = h.edges[i][rng.random(len(h.edges[i])) < keep]
    sets = {i: h.edge_set(i) for i in range(k)}
    hits = [c for c in itertools.product(*[range(s) for s in sizes])
            if all(c[:i] + c[i + 1:] in sets[i] for i in range(k))]
    got = detect_hyperclique(h)
    assert got == (hits[0] if hits else None)
    if got is not None:
        assert check_hyperclique(h, got)


def test_foursum_examples():
    assert detect_foursum([0], [0], [0], [0]) == (0, 0, 0, 0)
    assert detect_foursum([1], [1], [1], [1]) is None


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(-15, 15), max_size=5), min_size=4, max_size=4))
def test_foursum_matches_oracle(bs):
    hits = [t for t in itertools.product(*[sorted(set(b)) for b in bs]) if sum(t) == 0]
    got = detect_foursum(*bs)
    assert got == (min(hits) if hits else None)
    if got is not None:
        assert check_foursum(*bs, got)


# --- file formats ------------------------------------------------------------------


def test_intset_round_trip():
    sets = [IntSet(10, [1, 3, 5]), IntSet(10, []), IntSet(10, [10])]
    text = format_intsets(sets)
    assert text.startswith("intset v1\n")
    assert parse_intsets(text) == sets
    with pytest.raises(ParseError):
        parse_intsets("intset v1\nN=3\n1 7\n")
    with pytest.raises(ParseError):
        parse_intsets("intsets\n")


def test_intlist_round_trip():
    lists = [[0, -3, 7], [], [12]]
    assert parse_intlists(format_intlists(lists)) == lists
    with pytest.raises(ParseError):
        parse_intlists("intlist v1\ncount=1\n1 x\n")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 6), st.integers(-3, 3))
def test_bitmat_round_trip(seed, n, offset):
    ms = [BinaryMatrix(m.bits, offset) for m in random_matrices(np.random.default_rng(seed), n)]
    assert parse_bitmats(format_bitmats(ms)) == ms


def test_bitmat_errors():
    with pytest.raises(ParseError):
        parse_bitmats("bitmat v1\nrows=2 cols=2\n01\n2 1\n")
    with pytest.raises(ParseError):
        parse_bitmats("bitmat v1\nrows=2 cols=2\n01\n")


def test_graph_formats_round_trip():
    rng = np.random.default_rng(9)
    g = random_weighted_graph(rng, 6)
    g2 = parse_wgraph(format_wgraph(g))
    assert np.array_equal(g2.mask, g.mask)
    assert np.array_equal(np.where(g.mask, g.weights, 0), np.where(g2.mask, g2.weights, 0))
    tp = WeightedTripartite.from_graph(g)
    tp2 = parse_tripartite(format_tripartite(tp))
    assert tp2.M == tp.M and detect_zero_triangle(tp2) == detect_zero_triangle(tp)
    for a, b in [(tp.m_xy, tp2.m_xy), (tp.m_yz, tp2.m_yz), (tp.m_zx, tp2.m_zx)]:
        assert np.array_equal(a, b)


def test_hypergraph_round_trip():
    h = full_hypergraph(3, [2, 1, 2])
    h.edges[0] = h.edges[0][:1]
    h2 = parse_hypergraph(format_hypergraph(h))
    assert h2.parts == h.parts
    assert all(h2.edge_set(i) == h.edge_set(i) for i in range(3))
    with pytest.raises(ParseError):
        parse_hypergraph("hypergraph v1\nk=3\nedge 0 1\n")
