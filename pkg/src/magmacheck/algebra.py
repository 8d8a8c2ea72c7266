"""Group, field and ring checks that avoid the n^3 brute force."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import modp
from .core import MagmaError, Structure, make_structure, restrict
from .verify import FieldConfig, Verdict, fails, holds


class NotGenerating(MagmaError):
    pass


class NotAGroup(MagmaError):
    pass


@dataclass
class GroupReport:
    identity: int | None
    has_inverses: bool
    commutative: bool
    associative: bool
    generators: list[int] = field(default_factory=list)

    @property
    def is_group(self) -> bool:
        return self.identity is not None and self.has_inverses and self.associative

    @property
    def is_abelian_group(self) -> bool:
        return self.is_group and self.commutative


@dataclass
class Basis:
    """Subset B with B + B covering the group.

    ``elements`` is sorted.  ``decomposition`` lists (generator, order) pairs
    of the cyclic factors, ``digits`` the virtual digit sizes per factor.
    """

    elements: list[int]
    decomposition: list[tuple[int, int]]
    digits: list[tuple[int, ...]]

    def __len__(self):
        return len(self.elements)


def find_identity_element(s: Structure, op: str) -> int | None:
    t = s.table(op)
    r = np.arange(s.n)
    for e in range(s.n):
        if np.array_equal(t[e], r) and np.array_equal(t[:, e], r):
            return e
    return None


def inverses_exist(t: np.ndarray, e: int) -> bool:
    """Every x has some y with x.y = y.x = e."""
    both = (t == e) & (t.T == e)
    return bool(both.any(axis=1).all())


def closure(t: np.ndarray, gens: Iterable[int]) -> np.ndarray:
    """Boolean mask of the smallest subset containing gens and closed under t."""
    n = t.shape[0]
    inside = np.zeros(n, dtype=bool)
    frontier = sorted(set(int(g) for g in gens))
    members: list[int] = []
    for g in frontier:
        inside[g] = True
    while frontier:
        new = frontier
        members.extend(new)
        m = np.array(members)
        nw = np.array(new)
        prods = np.concatenate([t[np.ix_(nw, m)].ravel(), t[np.ix_(m, nw)].ravel()])
        prods = np.unique(prods)
        prods = prods[~inside[prods]]
        inside[prods] = True
        frontier = prods.tolist()
    return inside


def greedy_generators(t: np.ndarray) -> list[int]:
    """Add the least element outside the current closure until everything is covered."""
    n = t.shape[0]
    gens: list[int] = []
    inside = np.zeros(n, dtype=bool)
    while not inside.all():
        g = int(np.argmin(inside))
        gens.append(g)
        inside = closure(t, gens)
    return gens


def light_associativity_witness(s: Structure, op: str, generators: Sequence[int] | None = None) -> tuple | None:
    """Least failing (a, r, c) with r a generator, or None if associative.

    Checking a.(r.c) = (a.r).c for r in a generating set suffices.
    """
    t = s.table(op)
    if generators is None:
        generators = greedy_generators(t)
    elif not closure(t, generators).all():
        raise NotGenerating(f"{list(generators)} does not generate the structure")
    ti = t.astype(np.intp)
    found = None
    for r in sorted(set(int(g) for g in generators)):
        left = t[ti[:, r][:, None], np.arange(s.n)[None, :]]  # (a.r).c
        right = t[np.arange(s.n)[:, None], ti[r][None, :]]  # a.(r.c)
        bad = np.argwhere(left != right)
        if len(bad):
            a, c = bad[0]
            cand = (int(a), r, int(c))
            found = cand if found is None else min(found, cand)
    return found


def light_associativity(s: Structure, op: str, generators: Sequence[int] | None = None) -> bool:
    return light_associativity_witness(s, op, generators) is None


def is_associative_bruteforce(t: np.ndarray) -> bool:
    n = t.shape[0]
    ti = t.astype(np.intp)
    for a in range(n):
        if not np.array_equal(t[ti[a][:, None], np.arange(n)[None, :]], t[a][ti]):
            return False
    return True


def formal_product(t: np.ndarray, u: np.ndarray, v: np.ndarray, p: int) -> np.ndarray:
    """Bilinear extension of the operation to formal sums over F_p."""
    n = t.shape[0]
    w = modp.mulmod(u[:, None], v[None, :], p)
    return modp.bincount_mod(t.ravel(), w, n, p)


def rs_associativity_test(s: Structure, op: str, cfg: FieldConfig = FieldConfig()) -> Verdict:
    """Randomised associativity check in O(n^2) per trial; Fails is sound."""
    t = s.table(op)
    n, p = s.n, cfg.p
    for trial in range(cfg.trials):
        rng = cfg.rng(2000 + trial)
        r, q, w = (modp.random_vector(rng, n, p) for _ in range(3))
        left = formal_product(t, formal_product(t, r, q, p), w, p)
        right = formal_product(t, r, formal_product(t, q, w, p), p)
        if not np.array_equal(left, right):
            return fails(None, engine="rajagopalan-schulman")
    return holds((3 / p) ** cfg.trials, engine="rajagopalan-schulman")


def group_report(s: Structure, op: str) -> GroupReport:
    t = s.table(op)
    e = find_identity_element(s, op)
    inv = e is not None and inverses_exist(t, e)
    gens = greedy_generators(t)
    assoc = light_associativity(s, op, gens)
    return GroupReport(e, inv, bool(np.array_equal(t, t.T)), assoc, gens)


# --- abelian groups --------------------------------------------------------


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _orders(t: np.ndarray, e: int) -> np.ndarray:
    n = t.shape[0]
    orders = np.zeros(n, dtype=np.int64)
    cur = np.arange(n)
    ti = t.astype(np.intp)
    r = np.arange(n)
    for k in range(1, n + 1):
        hit = (cur == e) & (orders == 0)
        orders[hit] = k
        if (orders > 0).all():
            break
        cur = ti[cur, r]
    if (orders == 0).any():
        raise NotAGroup("some element has no finite order")
    return orders


def _multiple(t, x: int, k: int, e: int) -> int:
    acc = e
    for _ in range(k):
        acc = int(t[acc, x])
    return acc


def abelian_decomposition(s: Structure, op: str = "+") -> list[tuple[int, int]]:
    """Cyclic factors (generator, order) of prime-power order with product n.

    Works prime by prime: inside each p-part, repeatedly take an element of
    largest order modulo the current span and lift it to one of the same order.
    """
    t = s.table(op)
    n = s.n
    e = find_identity_element(s, op)
    if e is None or not inverses_exist(t, e) or not np.array_equal(t, t.T):
        raise NotAGroup(f"{op!r} is not a commutative group")
    orders = _orders(t, e)
    factors: list[tuple[int, int]] = []
    for p in _prime_factors(n):
        part = [x for x in range(n) if _is_power(orders[x], p)]
        coords: dict[int, tuple] = {e: ()}
        gens: list[tuple[int, int]] = []
        while len(coords) < len(part):
            best, best_q = None, 1
            for x in part:
                q = _quotient_order(t, x, coords, e)
                if q > best_q:
                    best, best_q = x, q
            if best is None:
                raise NotAGroup("p-part is not closed")
            target = _multiple(t, best, best_q, e)
            ms = coords[target]
            lifted = best
            for (g, go), m in zip(gens, ms):
                if m % best_q:
                    raise NotAGroup("lifting failed; operation is not an abelian group")
                neg = (go - m // best_q) % go
                lifted = int(t[lifted, _multiple(t, g, neg, e)])
            if _multiple(t, lifted, best_q, e) != e:
                raise NotAGroup("lifting failed; operation is not an abelian group")
            new_coords = {}
            cur = e
            for j in range(best_q):
                for x, c in coords.items():
                    y = int(t[x, cur])
                    if y in new_coords:
                        raise NotAGroup("span is not a direct sum")
                    new_coords[y] = c + (j,)
                cur = int(t[cur, lifted])
            gens.append((lifted, best_q))
            coords = new_coords
        factors.extend(gens)
    if math.prod(o for _, o in factors) != n:
        raise NotAGroup("factor orders do not multiply to n")
    return factors


def _is_power(m: int, p: int) -> bool:
    m = int(m)
    while m % p == 0:
        m //= p
    return m == 1


def _quotient_order(t, x: int, coords: dict, e: int) -> int:
    k, cur = 1, x
    while cur not in coords:
        cur = int(t[cur, x])
        k += 1
    return k


def _digit_split(order: int) -> tuple[int, ...]:
    if order < 4:
        return (order,)
    lo = math.isqrt(order - 1) + 1
    return (lo, -(-order // lo))


def _best_partition(sizes: list[int]) -> tuple[list[int], list[int]]:
    """Split digit positions into two groups minimising the two products' sum."""
    idx = list(range(len(sizes)))
    if len(idx) <= 18:
        best = None
        for mask in range(1 << max(0, len(idx) - 1)):
            left = [i for i in idx if i < len(idx) - 1 and mask >> i & 1]
            right = [i for i in idx if i not in left]
            cost = math.prod(sizes[i] for i in left) + math.prod(sizes[i] for i in right)
            if best is None or cost < best[0]:
                best = (cost, left, right)
        return best[1], best[2]
    left, right, pl, pr = [], [], 1, 1
    for i in sorted(idx, key=lambda i: -sizes[i]):
        if pl <= pr:
            left.append(i)
            pl *= sizes[i]
        else:
            right.append(i)
            pr *= sizes[i]
    return left, right


def abelian_basis(s: Structure, op: str = "+") -> Basis:
    """Basis with |B| <= 4*ceil(sqrt(n)) such that B + B is the whole group."""
    t = s.table(op)
    e = find_identity_element(s, op)
    factors = abelian_decomposition(s, op)
    digits = [_digit_split(o) for _, o in factors]
    # each position: (factor index, weight, size)
    positions = []
    for fi, ((g, o), ds) in enumerate(zip(factors, digits)):
        weight = 1
        for size in ds:
            positions.append((fi, weight, size))
            weight *= size
    sizes = [p[2] for p in positions]
    left, right = _best_partition(sizes)
    elements = set()
    for group in (left, right):
        ranges = [range(sizes[i]) for i in group]
        for combo in itertools.product(*ranges):
            acc = e
            for i, d in zip(group, combo):
                fi, weight, _ = positions[i]
                g, o = factors[fi]
                acc = int(t[acc, _multiple(t, g, (d * weight) % o, e)])
            elements.add(acc)
    return Basis(sorted(elements), factors, digits)


def covers(t: np.ndarray, basis: Sequence[int]) -> bool:
    b = np.array(sorted(basis))
    return np.unique(t[np.ix_(b, b)]).size == t.shape[0]


# --- fields and rings ------------------------------------------------------


def _reject(reason: str, witness=None, engine="field") -> Verdict:
    return Verdict(False, 0.0, witness, reason, engine)


def _abelian_group_axioms(s: Structure, op: str, label: str, names=None):
    """Returns (identity, generators) or a rejecting Verdict.

    ``names`` maps indices of ``s`` to the labels used in messages.
    """
    nm = (lambda i: int(i)) if names is None else (lambda i: int(names[i]))  # noqa: E731
    t = s.table(op)
    e = find_identity_element(s, op)
    if e is None:
        return _reject(f"{label} identity")
    if not inverses_exist(t, e):
        bad = nm(np.argmin(((t == e) & (t.T == e)).any(axis=1)))
        return _reject(f"{label} inverses: {bad} has none", (bad,))
    if not np.array_equal(t, t.T):
        i, j = (nm(v) for v in np.argwhere(t != t.T)[0])
        return _reject(f"{label} commutativity: {i}{op}{j} != {j}{op}{i}", (i, j))
    gens = greedy_generators(t)
    w = light_associativity_witness(s, op, gens)
    if w is not None:
        return _reject(f"{label} associativity", tuple(nm(v) for v in w))
    return e, gens


def _distributive_failures(tadd, tmul, xs, ys, zs):
    """First (x, y, z) in the given index sets with x*(y+z) != x*y + x*z."""
    xs, ys, zs = (np.asarray(v, dtype=np.intp) for v in (xs, ys, zs))
    lhs = tmul[xs[:, None, None], tadd[ys[:, None], zs[None, :]][None]]
    rhs = tadd[tmul[xs[:, None], ys[None, :]][:, :, None], tmul[xs[:, None], zs[None, :]][:, None, :]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        i, j, k = bad[0]
        return int(xs[i]), int(ys[j]), int(zs[k])
    return None


def _right_distributive_failures(tadd, tmul, xs, ys, zs):
    """First (x, y, z) with (y+z)*x != y*x + z*x."""
    xs, ys, zs = (np.asarray(v, dtype=np.intp) for v in (xs, ys, zs))
    lhs = tmul[tadd[ys[:, None], zs[None, :]][None], xs[:, None, None]]
    rhs = tadd[tmul[ys[None, :], xs[:, None]][:, :, None], tmul[zs[None, :], xs[:, None]][:, None, :]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        i, j, k = bad[0]
        return int(xs[i]), int(ys[j]), int(zs[k])
    return None


def field_verify(s: Structure, add: str = "+", mul: str = "*") -> Verdict:
    """Deterministic field check in roughly O(n^2 log n) table lookups."""
    n = s.n
    if n < 2:
        return _reject("a field needs at least two elements")
    res = _abelian_group_axioms(s, add, "additive")
    if isinstance(res, Verdict):
        return res
    zero, _ = res
    tadd = s.table(add).astype(np.intp)
    tmul = s.table(mul).astype(np.intp)
    if not ((tmul[zero] == zero).all() and (tmul[:, zero] == zero).all()):
        x = int(np.argmax((tmul[zero] != zero) | (tmul[:, zero] != zero)))
        return _reject(f"zero absorption fails at {x}", (x,))
    nz = [x for x in range(n) if x != zero]
    sub = tmul[np.ix_(nz, nz)]
    if (sub == zero).any():
        i, j = np.argwhere(sub == zero)[0]
        a, b = nz[i], nz[j]
        return _reject(f"zero divisor: {a}{mul}{b}={zero}", (a, b))
    mstruct, back = restrict(s, mul, nz)
    res = _abelian_group_axioms(mstruct, mul, "multiplicative", back)
    if isinstance(res, Verdict):
        return res
    allx = np.arange(n)
    for xs, ys, zs in (([zero], allx, allx), (allx, [zero], allx), (allx, allx, [zero])):
        w = _distributive_failures(tadd, tmul, xs, ys, zs)
        if w is not None:
            return _reject("distributivity", w)
    sa = abelian_basis(s, add).elements
    sm = [back[i] for i in abelian_basis(mstruct, mul).elements]
    w = _distributive_failures(tadd, tmul, sm, sa, allx)
    if w is not None:
        return _reject("distributivity", w)
    one = back[find_identity_element(mstruct, mul)]
    return Verdict(True, 0.0, None, None, "field", details={"zero": zero, "one": one,
                                                            "basis_add": len(sa), "basis_mul": len(sm)})


def ring_verify(s: Structure, cfg: FieldConfig = FieldConfig(), require_unital: bool = False,
                add: str = "+", mul: str = "*") -> Verdict:
    """Ring check; Reject is always justified, Accept may err with probability err_bound."""
    res = _abelian_group_axioms(s, add, "additive")
    if isinstance(res, Verdict):
        return Verdict(False, 0.0, res.witness, res.reason, "ring")
    zero, _ = res
    rs = rs_associativity_test(s, mul, cfg)
    if not rs.holds:
        return Verdict(False, 0.0, None, "multiplicative associativity", "ring")
    tadd = s.table(add).astype(np.intp)
    tmul = s.table(mul).astype(np.intp)
    basis = abelian_basis(s, add).elements
    allx = np.arange(s.n)
    checks = (
        (_distributive_failures, basis, basis, allx),
        (_distributive_failures, allx, basis, basis),
        (_right_distributive_failures, basis, basis, allx),
        (_right_distributive_failures, allx, basis, basis),
    )
    for fn, xs, ys, zs in checks:
        w = fn(tadd, tmul, xs, ys, zs)
        if w is not None:
            side = "left" if fn is _distributive_failures else "right"
            return Verdict(False, 0.0, w, f"{side} distributivity", "ring")
    one = find_identity_element(s, mul)
    if require_unital and one is None:
        return Verdict(False, 0.0, None, "multiplicative identity", "ring")
    return Verdict(True, rs.err_bound, None, None, "ring", details={"zero": zero, "one": one,
                                                                    "basis_add": len(basis)})


# --- reference checkers (cubic) -------------------------------------------


def field_bruteforce(s: Structure, add: str = "+", mul: str = "*") -> bool:
    n = s.n
    if n < 2:
        return False
    tadd, tmul = s.table(add), s.table(mul)
    zero = find_identity_element(s, add)
    if zero is None or not inverses_exist(tadd, zero):
        return False
    if not (np.array_equal(tadd, tadd.T) and np.array_equal(tmul, tmul.T)):
        return False
    if not (is_associative_bruteforce(tadd) and is_associative_bruteforce(tmul)):
        return False
    one = find_identity_element(s, mul)
    if one is None or one == zero:
        return False
    for x in range(n):
        if x != zero and not (tmul[x] == one).any():
            return False
    return _distributive_failures(tadd.astype(np.intp), tmul.astype(np.intp),
                                  np.arange(n), np.arange(n), np.arange(n)) is None


def ring_bruteforce(s: Structure, require_unital: bool = False, add: str = "+", mul: str = "*") -> bool:
    tadd, tmul = s.table(add), s.table(mul)
    zero = find_identity_element(s, add)
    if zero is None or not inverses_exist(tadd, zero) or not np.array_equal(tadd, tadd.T):
        return False
    if not (is_associative_bruteforce(tadd) and is_associative_bruteforce(tmul)):
        return False
    r = np.arange(s.n)
    ta, tm = tadd.astype(np.intp), tmul.astype(np.intp)
    if _distributive_failures(ta, tm, r, r, r) is not None:
        return False
    if _right_distributive_failures(ta, tm, r, r, r) is not None:
        return False
    return not require_unital or find_identity_element(s, mul) is not None


# --- standard examples -----------------------------------------------------


def prime_field(p: int) -> Structure:
    r = np.arange(p)
    return make_structure(p, {"+": (r[:, None] + r) % p, "*": (r[:, None] * r) % p}, {"zero": 0, "one": 1})


def galois_field(p: int, k: int, modulus: Sequence[int] | None = None) -> Structure:
    """GF(p^k) with elements encoded as base-p digit vectors (low digit first)."""
    if modulus is None:
        modulus = _find_irreducible(p, k)
    q = p ** k
    digits = np.array([[(x // p ** i) % p for i in range(k)] for x in range(q)])
    weights = p ** np.arange(k)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    mul = np.zeros((q, q), dtype=np.int64)
    for x in range(q):
        for y in range(q):
            mul[x, y] = _encode(_polymulmod(digits[x], digits[y], modulus, p), p)
    return make_structure(q, {"+": add, "*": mul}, {"zero": 0, "one": 1})


def _encode(coeffs, p):
    return int(sum(int(c) * p ** i for i, c in enumerate(coeffs)))


def _polymulmod(a, b, modulus, p):
    k = len(modulus) - 1
    prod = [0] * (2 * k)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + int(x) * int(y)) % p
    lead_inv = pow(int(modulus[-1]), p - 2, p)
    for d in range(len(prod) - 1, k - 1, -1):
        c = prod[d] * lead_inv % p
        if c:
            for i, m in enumerate(modulus):
                prod[d - k + i] = (prod[d - k + i] - c * int(m)) % p
    return prod[:k]


def _find_irreducible(p: int, k: int) -> list[int]:
    for tail in itertools.product(range(p), repeat=k):
        poly = list(tail) + [1]
        if poly[0] == 0:
            continue
        if not any(_has_factor(poly, deg, p) for deg in range(1, k // 2 + 1)):
            return poly
    raise ValueError("no irreducible polynomial found")


def _has_factor(poly, deg, p):
    for tail in itertools.product(range(p), repeat=deg):
        div = list(tail) + [1]
        if _polymod(poly, div, p) == [0] * deg:
            return True
    return False


def _polymod(a, b, p):
    a = list(a)
    k = len(b) - 1
    for d in range(len(a) - 1, k - 1, -1):
        c = a[d]
        if c:
            for i, m in enumerate(b):
                a[d - k + i] = (a[d - k + i] - c * m) % p
    return a[:k]


def matrix_ring_z2() -> Structure:
    """All 2x2 matrices over Z_2; element index encodes entries row-major as bits."""
    mats = [np.array([[x >> 3 & 1, x >> 2 & 1], [x >> 1 & 1, x & 1]]) for x in range(16)]
    enc = lambda m: int(m[0, 0] << 3 | m[0, 1] << 2 | m[1, 0] << 1 | m[1, 1])  # noqa: E731
    add = [[enc((a + b) % 2) for b in mats] for a in mats]
    mul = [[enc((a @ b) % 2) for b in mats] for a in mats]
    return make_structure(16, {"+": add, "*": mul}, {"zero": 0})
