import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import DIST, ap_free_sets, random_graph, random_matrices, random_sets, random_structure
from magmacheck.core import make_structure
from magmacheck.detect import (
    BinaryMatrix,
    IntSet,
    WeightedGraph,
    check_kap,
    check_multichromatic_kap,
    check_multichromatic_square,
    check_multichromatic_T,
    check_square,
    detect_foursum,
    detect_hyperclique,
    detect_kap,
    detect_multichromatic_kap,
    detect_multichromatic_square,
    detect_multichromatic_T,
    detect_square,
    detect_triangle,
    detect_zero_triangle_graph,
)
from magmacheck.expr import ConstantTerm, Leaf, Regime, classify_shape, evaluate_at, parse_expression, parse_identity, subexpressions
from magmacheck.reduce import (
    FAMILY_EXPRESSIONS,
    INF,
    SQUARE_FAMILIES,
    T_FAMILIES,
    MissingConstant,
    WeightOutOfRange,
    ap_to_hyperclique,
    apply_ruler_matrix,
    behrend_class,
    behrend_partition,
    colorize_kap,
    element_of,
    embedding_element,
    family_expression,
    fourap_to_foursum,
    fourap_to_square,
    fourap_to_T,
    foursum_points,
    foursum_witness_to_ap,
    hyperclique_witness_to_ap,
    iter_monochromatize_kap,
    mono_to_multi_square_witness,
    mono_to_multi_witness,
    multi_to_mono_square,
    pattern_to_triple,
    ruler_base,
    ruler_image,
    ruler_preimage,
    ruler_set,
    square_to_identity,
    square_witness_to_ap,
    squarefree_matrices,
    subexpression_embedding,
    t_to_identity,
    t_witness_to_ap,
    triangle_to_distributivity,
    triangle_witness,
    triple_to_pattern,
    zero_triangle_to_constant_identity,
    zero_triangle_to_counting,
)
from magmacheck.verify import brute_force_verify, count_distributive_triples


def ctic(s, f):
    return brute_force_verify(s, ConstantTerm(f))


def triangle_graph(w01, w12, w02):
    w = np.array([[0, w01, w02], [w01, 0, w12], [w02, w12, 0]])
    return WeightedGraph(w, ~np.eye(3, dtype=bool))


# --- triangle and zero triangle ---------------------------------------------------


def test_triangle_to_distributivity_examples():
    ident = parse_identity(DIST)
    k3 = ~np.eye(3, dtype=bool)
    v = brute_force_verify(triangle_to_distributivity(k3), ident)
    assert not v.holds and triangle_witness(v.witness) == (0, 1, 2)
    star = np.zeros((4, 4), bool)
    star[0, 1:] = star[1:, 0] = True
    assert brute_force_verify(triangle_to_distributivity(star), ident).holds
    assert brute_force_verify(triangle_to_distributivity(np.zeros((5, 5), bool)), ident).holds


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 10))
def test_triangle_reduction_end_to_end(seed, n):
    adj = random_graph(np.random.default_rng(seed), n)
    v = brute_force_verify(triangle_to_distributivity(adj), parse_identity(DIST))
    assert v.holds == (detect_triangle(adj) is None)
    if not v.holds:
        u, w, x = triangle_witness(v.witness)
        assert adj[u, w] and adj[w, x] and adj[u, x]


def test_zero_triangle_constant_identity_examples():
    inst = zero_triangle_to_constant_identity(triangle_graph(2, -3, 1))
    assert inst.structure.n == 7 * 3 + 4
    v = ctic(inst.structure, inst.expression)
    assert not v.holds
    assert detect_zero_triangle_graph(triangle_graph(2, -3, 1)) is not None
    inst = zero_triangle_to_constant_identity(triangle_graph(1, 1, 1))
    assert ctic(inst.structure, inst.expression).holds
    assert classify_shape(inst.expression) == Regime.CUBIC


def test_weight_out_of_range():
    g = WeightedGraph(np.array([[0, 9], [9, 0]]), np.array([[0, 1], [1, 0]], bool))
    with pytest.raises(WeightOutOfRange):
        zero_triangle_to_counting(g)
    with pytest.raises(WeightOutOfRange):
        zero_triangle_to_constant_identity(g, M=2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 6))
def test_zero_triangle_constant_identity_end_to_end(seed, n):
    rng = np.random.default_rng(seed)
    mask = random_graph(rng, n)
    w = np.triu(rng.integers(-n, n + 1, (n, n)), 1)
    g = WeightedGraph(np.where(mask, w + w.T, 0), mask)
    inst = zero_triangle_to_constant_identity(g)
    assert inst.structure.n == 7 * n + 4
    v = ctic(inst.structure, inst.expression)
    assert v.holds == (detect_zero_triangle_graph(g) is None)
    if not v.holds:
        a, b, c = inst.witness_map(v.witness)
        assert len({a, b, c}) == 3
        assert g.weights[a, b] + g.weights[a, c] + g.weights[b, c] == 0


def ordered_zero_triples(g):
    n = g.n
    w = np.where(g.mask, g.weights, 3 * n + 1)
    np.fill_diagonal(w, 3 * n + 1)
    return sum(1 for a, b, c in itertools.product(range(n), repeat=3) if w[a, b] + w[a, c] == -w[b, c])


def test_counting_examples():
    s = zero_triangle_to_counting(triangle_graph(1, -1, 0))
    assert count_distributive_triples(s) == s.n ** 3 - 21
    s = zero_triangle_to_counting(triangle_graph(1, 1, 1))
    assert count_distributive_triples(s) == s.n ** 3 - 27
    for op in ("+", "*"):
        assert np.array_equal(s.table(op), s.table(op).T)


@pytest.mark.parametrize("seed", range(4))
def test_counting_formula(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    mask = random_graph(rng, n)
    w = np.triu(rng.integers(-n, n + 1, (n, n)), 1)
    g = WeightedGraph(np.where(mask, w + w.T, 0), mask)
    s = zero_triangle_to_counting(g)
    assert count_distributive_triples(s) == s.n ** 3 - n ** 3 + ordered_zero_triples(g)


# --- Behrend partition and colour coding ---------------------------------------


def test_behrend_examples():
    assert behrend_class(5, 4, 2) == (frozenset(), 2)
    assert behrend_class(0, 4, 3) == (frozenset(), 0)
    with pytest.raises(ValueError):
        behrend_class(1, 5, 2)


@pytest.mark.parametrize("n,q", [(10, 4), (300, 4), (1000, 8), (5000, 16)])
def test_behrend_partition_is_ap_free_cover(n, q):
    classes = behrend_partition(n, q)
    flat = sorted(x for c in classes for x in c)
    assert flat == list(range(n + 1))
    for c in classes:
        assert detect_kap(c, 3) is None


def test_colorize_partitions_the_set():
    A = IntSet(20, [1, 3, 5, 7, 11, 20])
    for trial in colorize_kap(A, 4, 10, seed=2):
        assert sorted(x for s in trial for x in s) == list(A.members)


def test_colorize_success_rate():
    # two progressions survive: 1,3,5,7 and 7,5,3,1, so each trial succeeds w.p. 2/256
    A = IntSet(7, [1, 3, 5, 7])
    trials = colorize_kap(A, 4, 6000, seed=0)
    hits = sum(detect_multichromatic_kap(t) is not None for t in trials)
    p = 2 / 256
    sd = math.sqrt(6000 * p * (1 - p))
    assert abs(hits - 6000 * p) < 5 * sd
    assert hits / 6000 >= 4 ** -4
    # 64 trials per seed: success probability 1 - (1 - p)^64, about 0.39
    wins = sum(any(detect_multichromatic_kap(t) is not None for t in colorize_kap(A, 4, 64, seed=s))
               for s in range(300))
    q = 1 - (1 - p) ** 64
    assert abs(wins - 300 * q) < 5 * math.sqrt(300 * q * (1 - q))


def test_colorize_never_invents_progressions():
    rng = np.random.default_rng(5)
    for _ in range(30):
        A = IntSet(30, rng.choice(31, 6, replace=False).tolist())
        for t in colorize_kap(A, 4, 5, seed=int(rng.integers(1 << 20))):
            w = detect_multichromatic_kap(t)
            if w is not None:
                a, d = w
                assert check_kap(A.members, 4, (min(a, a + 3 * d), abs(d)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.booleans())
def test_monochromatize_end_to_end(seed, plant):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 25))
    sets = random_sets(rng, n, 4, plant=plant)
    want = detect_multichromatic_kap(sets)
    found = None
    for _, b in iter_monochromatize_kap(sets):
        w = detect_kap(b, 4)
        if w is not None:
            found = w
            break
    assert (found is None) == (want is None)
    if found is not None:
        assert check_multichromatic_kap(sets, mono_to_multi_witness(found, n))


# --- 4-AP to squares and Ts -------------------------------------------------------


def any_pattern(insts, detector):
    for inst in insts:
        w = detector(*inst.matrices)
        if w is not None:
            return inst, w
    return None


def test_square_cell_example():
    # N = 3 needs 6n <= 9, so n = 1; P1 at (1,1) reads -3 + 6N = 15
    sets = [IntSet(1, [0, 1])] * 4
    inst = fourap_to_square(sets)
    zero = [x for x in inst if x.delta == 0][0]
    assert zero.N == 3
    assert zero.matrices[0][1, 1] == (15 in {6 * a for a in sets[0]})


def test_square_first_matrix_formula():
    sets = random_sets(np.random.default_rng(1), 40, 4, size=8)
    inst = fourap_to_square(sets)[5]
    N, M1 = inst.N, inst.matrices[0]
    lo = M1.offset
    for i, j in itertools.product(range(lo, lo + M1.rows), repeat=2):
        assert M1[i, j] == (6 * j * N - 3 * i in {6 * a for a in sets[0]})


def test_square_from_ap_0123():
    sets = [IntSet(3, [0, 1, 2, 3])] * 4
    hit = any_pattern(fourap_to_square(sets), detect_multichromatic_square)
    assert hit is not None
    assert check_multichromatic_kap(sets, square_witness_to_ap(*hit))


@pytest.mark.parametrize("seed", range(12))
def test_square_and_T_end_to_end(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 60))
    sets = random_sets(rng, n, 4, size=5, plant=seed % 2 == 0)
    want = detect_multichromatic_kap(sets)
    sq = any_pattern(fourap_to_square(sets), detect_multichromatic_square)
    t = any_pattern(fourap_to_T(sets), detect_multichromatic_T)
    assert (sq is None) == (want is None)
    assert (t is None) == (want is None)
    if sq is not None:
        assert check_multichromatic_kap(sets, square_witness_to_ap(*sq))
        assert check_multichromatic_kap(sets, t_witness_to_ap(*t))


def test_ap_free_inputs_give_no_patterns():
    rng = np.random.default_rng(11)
    for _ in range(3):
        sets = ap_free_sets(rng, 50)
        assert any_pattern(fourap_to_square(sets), detect_multichromatic_square) is None
        assert any_pattern(fourap_to_T(sets), detect_multichromatic_T) is None


def test_every_T_witness_maps_back():
    sets = [IntSet(12, [0, 4, 8, 12]), IntSet(12, [1, 4, 7]), IntSet(12, [2, 8, 5]), IntSet(12, [3, 12, 6])]
    seen = 0
    for inst in fourap_to_T(sets):
        w = detect_multichromatic_T(*inst.matrices)
        if w is not None:
            assert check_multichromatic_kap(sets, t_witness_to_ap(inst, w))
            seen += 1
    assert seen > 0


# --- square-free matrices and multi -> mono -------------------------------------


@pytest.mark.parametrize("n", [1, 5, 17, 64])
def test_squarefree_matrices(n):
    ms = squarefree_matrices(n)
    total = sum(m.bits.astype(int) for m in ms)
    assert (total == 1).all()
    for m in ms:
        assert detect_square(m) is None


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 5))
def test_multi_to_mono_end_to_end(seed, n):
    rng = np.random.default_rng(seed)
    ms = random_matrices(rng, n, rng.uniform(0.05, 0.5))
    want = detect_multichromatic_square(*ms)
    found = None
    for big in multi_to_mono_square(ms):
        assert big.shape == (3 * n, 3 * n)
        w = detect_square(big)
        if w is not None:
            found = w
            assert check_square(big, w) and w[2] > n
            break
    assert (found is None) == (want is None)
    if found is not None:
        assert check_multichromatic_square(*ms, mono_to_multi_square_witness(found, n))


# --- pattern identities ---------------------------------------------------------------


@pytest.mark.parametrize("family", sorted(FAMILY_EXPRESSIONS))
def test_family_expressions_are_cubic(family):
    assert classify_shape(family_expression(family)) == Regime.CUBIC


def test_f1_example():
    one = BinaryMatrix(np.ones((1, 1)))
    inst = square_to_identity(one, one, one, one, "f1")
    assert pattern_to_triple("f1", 1, 1, 0) == (1, 0, 2)
    n = 1
    got = evaluate_at(inst.expression, inst.structure, element_of(1, n), element_of(0, n), element_of(2, n))
    assert got == element_of(0, n) != INF


@pytest.mark.parametrize("family", sorted(FAMILY_EXPRESSIONS))
def test_pattern_triple_round_trip(family):
    for i, j, k in itertools.product(range(-3, 4), repeat=3):
        assert triple_to_pattern(family, *pattern_to_triple(family, i, j, k)) == (i, j, k)


@pytest.mark.parametrize("family", SQUARE_FAMILIES + T_FAMILIES)
def test_pattern_identity_end_to_end(family):
    rng = np.random.default_rng(sorted(FAMILY_EXPRESSIONS).index(family))
    make = square_to_identity if family in SQUARE_FAMILIES else t_to_identity
    detector = detect_multichromatic_square if family in SQUARE_FAMILIES else detect_multichromatic_T
    check = check_multichromatic_square if family in SQUARE_FAMILIES else check_multichromatic_T
    seen = {True: 0, False: 0}
    cases = [[BinaryMatrix(np.ones((2, 2)), 0)] * 4]
    for _ in range(12):
        n = int(rng.integers(1, 4))
        off = int(rng.integers(-1, 2))
        cases.append([BinaryMatrix(m.bits, off) for m in random_matrices(rng, n, rng.uniform(0.1, 0.6))])
    for ms in cases:
        n = ms[0].rows
        inst = make(*ms, family=family)
        assert inst.structure.n == 20 * n + 2
        v = ctic(inst.structure, inst.expression)
        want = detector(*ms)
        assert v.holds == (want is None)
        if not v.holds:
            assert check(*ms, inst.witness_map(v.witness))
        seen[v.holds] += 1
    assert seen[True] and seen[False]


def test_wrong_family_rejected():
    one = BinaryMatrix(np.ones((1, 1)))
    with pytest.raises(ValueError):
        square_to_identity(one, one, one, one, "f5")
    with pytest.raises(ValueError):
        t_to_identity(one, one, one, one, "f1")


# --- ruler trick and hypercliques ----------------------------------------------------


@pytest.mark.parametrize("k", [3, 4, 5, 6])
def test_ruler_preimage_reproduces_ap(k):
    rng = np.random.default_rng(k)
    for _ in range(60):
        n = int(rng.integers(k, 3000))
        d = int(rng.integers(-(n // (k - 1)), n // (k - 1) + 1))
        a1 = int(rng.integers(max(0, -(k - 1) * d), min(n, n - (k - 1) * d) + 1))
        x = ruler_preimage(a1, a1 + d, n, k)
        assert apply_ruler_matrix(x) == [a1 + i * d for i in range(k)]
        q = ruler_base(n, k)
        assert q ** k > n and (q - 1) ** k <= n or q == 2
        image = set(ruler_image(n, k).tolist())
        assert set(x) <= image


@pytest.mark.parametrize("n,k", [(16, 4), (100, 4), (60, 3)])
def test_ruler_image_inside_ruler_set(n, k):
    img = ruler_image(n, k)
    full = ruler_set(n, k)
    assert np.isin(img, full).all()
    q = ruler_base(n, k)
    c = (k - 1) ** 2
    assert full.size <= math.comb(k, 2) * (2 * c * q + 1) ** 2 + 1
    # both sets have O(n^(2/k)) elements
    assert img.size <= 24 * q * q


def test_hyperclique_examples():
    sets = [IntSet(3, [0, 1, 2, 3])] * 4
    h = ap_to_hyperclique(sets)
    w = detect_hyperclique(h)
    assert w is not None
    assert check_multichromatic_kap(sets, hyperclique_witness_to_ap(h, w))


@pytest.mark.parametrize("seed", range(10))
def test_hyperclique_end_to_end(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 120))
    sets = random_sets(rng, n, 4, size=6, plant=seed % 2 == 1)
    h = ap_to_hyperclique(sets)
    w = detect_hyperclique(h)
    assert (w is None) == (detect_multichromatic_kap(sets) is None)
    if w is not None:
        assert check_multichromatic_kap(sets, hyperclique_witness_to_ap(h, w))


def test_hyperclique_with_explicit_digit_bound():
    sets = random_sets(np.random.default_rng(2), 10, 3, size=4, plant=True)
    h = ap_to_hyperclique(sets, c=4)
    w = detect_hyperclique(h)
    assert w is not None and check_multichromatic_kap(sets, hyperclique_witness_to_ap(h, w))


# --- 4SUM ---------------------------------------------------------------------------


def test_foursum_examples():
    sets = [IntSet(3, [v]) for v in range(4)]
    pts = foursum_points(sets)
    assert [p[0] for p in pts] == [(0, 0), (-2, -3), (2, 0), (0, 3)]
    assert tuple(map(sum, zip(*[p[0] for p in pts]))) == (0, 0)
    assert detect_foursum(*fourap_to_foursum(sets)) is not None
    same = [IntSet(9, [7])] * 4
    assert detect_foursum(*fourap_to_foursum(same)) is not None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.booleans())
def test_foursum_end_to_end(seed, plant):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 300))
    sets = random_sets(rng, n, 4, size=int(rng.integers(1, 10)), plant=plant)
    w = detect_foursum(*fourap_to_foursum(sets))
    assert (w is None) == (detect_multichromatic_kap(sets) is None)
    if w is not None:
        assert check_multichromatic_kap(sets, foursum_witness_to_ap(sets, w))


# --- subexpression embedding ------------------------------------------------------


def test_embedding_needs_inf():
    s = make_structure(2, {"*": [[0, 1], [1, 0]]})
    with pytest.raises(MissingConstant):
        subexpression_embedding(s, parse_expression("a*b"))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 3))
def test_embedding_properties(seed, which):
    rng = np.random.default_rng(seed)
    s = random_structure(rng, int(rng.integers(2, 6)), "absorbing")
    f = parse_expression(["(a*b)+(a*c)", "((a*b)+(a*c))+(b*c)", "(a*(b+c))*a", "(c+b)*(a+c)"][which])
    t, g = subexpression_embedding(s, f)
    subs = subexpressions(f)
    T = len(subs)
    assert t.n == s.n * T + 1
    tag = {Leaf(v): subs.index(Leaf(v)) for v in "abc"}
    for x, y, z in itertools.product(range(s.n), repeat=3):
        got = evaluate_at(g, t, embedding_element(x, tag[Leaf("a")], T), embedding_element(y, tag[Leaf("b")], T),
                          embedding_element(z, tag[Leaf("c")], T))
        val = evaluate_at(f, s, x, y, z)
        # inf of s is absorbing here, so a non-inf value never passes through inf
        if val != s.constants["inf"]:
            assert got == embedding_element(val, T - 1, T)
        else:
            assert got == INF
    # other tag triples always collapse to inf
    for ta, tb, tc in itertools.product(range(T), repeat=3):
        if (ta, tb, tc) == (tag[Leaf("a")], tag[Leaf("b")], tag[Leaf("c")]):
            continue
        for x, y, z in itertools.product(range(s.n), repeat=3):
            v = evaluate_at(g, t, embedding_element(x, ta, T), embedding_element(y, tb, T), embedding_element(z, tc, T))
            assert v == INF
    assert ctic(s, f).holds == ctic(t, g).holds
