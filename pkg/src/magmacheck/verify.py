"""Identity verification: brute force, polynomial identity testing, Freivalds."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import modp
from .core import MagmaError, Structure, UnknownOperation
from .expr import (
    PH_G,
    PH_H,
    PH_I,
    ConstantTerm,
    Equation,
    Expr,
    Identity,
    Regime,
    SubexpressionPair,
    classify_identity,
    classify_shape,
    evaluate,
    grid,
    matrix_form,
    quadratic_form,
)


class RouteTooWeak(MagmaError):
    pass


class PrimeTooSmall(MagmaError):
    pass


class DimensionMismatch(MagmaError):
    pass


class MissingOperation(UnknownOperation):
    pass


@dataclass(frozen=True)
class FieldConfig:
    p: int = modp.MERSENNE61
    trials: int = 2
    seed: int = 0

    def __post_init__(self):
        if not modp.is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.p >= 1 << 62:
            raise ValueError("p must be below 2^62")
        if self.trials < 1:
            raise ValueError("trials must be positive")

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check.

    ``holds`` is True for Holds/Accept.  ``err_bound`` bounds the chance a
    Holds is wrong (0 for exact engines).  ``witness`` is a failing triple
    when one is known; ``reason`` names the failed axiom for field/ring checks.
    """

    holds: bool
    err_bound: float = 0.0
    witness: tuple | None = None
    reason: str | None = None
    engine: str = ""
    regime: Regime | None = None
    details: dict = field(default_factory=dict, compare=False)

    def __bool__(self):
        return self.holds

    @property
    def outcome(self) -> str:
        return "holds" if self.holds else "fails"

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "err_bound": self.err_bound,
            "witness": list(self.witness) if self.witness is not None else None,
            "reason": self.reason,
            "engine": self.engine,
            "regime": str(self.regime) if self.regime is not None else None,
        }


def holds(err_bound=0.0, **kw) -> Verdict:
    return Verdict(True, err_bound=err_bound, **kw)


def fails(witness=None, **kw) -> Verdict:
    return Verdict(False, witness=witness, **kw)


def _ops_of(e: Expr, acc: set):
    if hasattr(e, "op"):
        acc.add(e.op)
        _ops_of(e.left, acc)
        _ops_of(e.right, acc)
    return acc


def _require_ops(s: Structure, ident: Identity):
    used: set = set()
    if isinstance(ident, ConstantTerm):
        _ops_of(ident.f, used)
    else:
        _ops_of(ident.lhs, used)
        _ops_of(ident.rhs, used)
    missing = sorted(used - set(s.ops))
    if missing:
        raise MissingOperation(f"structure lacks operation(s) {missing}")


# --- brute force -----------------------------------------------------------


def _chunk_rows(n: int, budget: int = 1 << 22) -> int:
    return max(1, budget // max(1, n * n))


def _first_mismatch(s: Structure, ident: Identity, lo: int, hi: int, ref):
    n = s.n
    r = np.arange(n)
    env = {"a": np.arange(lo, hi)[:, None, None], "b": r[None, :, None], "c": r[None, None, :]}
    if isinstance(ident, ConstantTerm):
        vals = np.broadcast_to(evaluate(ident.f, s, env), (hi - lo, n, n))
        bad = vals != ref
    else:
        lhs = np.broadcast_to(evaluate(ident.lhs, s, env), (hi - lo, n, n))
        rhs = np.broadcast_to(evaluate(ident.rhs, s, env), (hi - lo, n, n))
        bad = lhs != rhs
    if not bad.any():
        return None
    flat = int(np.argmax(bad.ravel()))
    a, rest = divmod(flat, n * n)
    b, c = divmod(rest, n)
    return (lo + a, b, c)


def brute_force_verify(s: Structure, ident: Identity, threads: int = 1) -> Verdict:
    """Exhaustive check over all n^3 triples; witnesses are lexicographically least."""
    _require_ops(s, ident)
    n = s.n
    ref = None
    if isinstance(ident, ConstantTerm):
        ref = int(evaluate(ident.f, s, {"a": 0, "b": 0, "c": 0}))
    step = _chunk_rows(n)
    blocks = [(lo, min(n, lo + step)) for lo in range(0, n, step)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            found = [w for w in pool.map(lambda b: _first_mismatch(s, ident, *b, ref), blocks) if w]
        witness = min(found) if found else None
    else:
        witness = None
        for lo, hi in blocks:
            witness = _first_mismatch(s, ident, lo, hi, ref)
            if witness is not None:
                break
    if witness is None:
        return holds(engine="brute")
    return fails(witness, engine="brute")


# --- weighted sums ---------------------------------------------------------


def _weights_by_var(x, y, z):
    return {"a": x, "b": y, "c": z}


def _sum_quadratic(s: Structure, f: Expr, wv: dict, w, p: int) -> int:
    form = quadratic_form(f)
    n = s.n
    x, y = form.pair
    gtab = grid(form.inner, s, x, y)
    ew = modp.mulmod(wv[x][:, None], wv[y][None, :], p)
    e = modp.bincount_mod(gtab, ew, n, p)
    htab = grid(form.outer, s, PH_G, form.v)
    inner = modp.mulmod(w[htab], wv[form.v][None, :], p)
    rows = modp.summod(inner, p, axis=1)
    return modp.dotmod(e, rows, p)


def _sum_matrix(s: Structure, f: Expr, wv: dict, w, p: int) -> int:
    form = matrix_form(f)
    n = s.n
    x, y = form.pair
    htab = grid(form.h, s, x, y)
    gtab = grid(form.g, s, x, y)
    ew = modp.mulmod(wv[x][:, None], wv[y][None, :], p)
    w_pq = modp.bincount_mod(htab.ravel() * n + gtab.ravel(), ew, n * n, p).reshape(n, n)
    if form.i_skel is None:
        itab = np.zeros((n, n), dtype=np.int64)
    else:
        itab = grid(form.i_skel, s, PH_H, form.v)
    hh = np.broadcast_to(np.arange(n)[:, None], (n, n))
    zw = np.broadcast_to(wv[form.v][None, :], (n, n))
    w_pr = modp.bincount_mod(hh.ravel() * n + itab.ravel(), zw, n * n, p).reshape(n, n)
    jtab = grid(form.j_skel, s, PH_I, PH_G)  # jtab[i, g]
    w_qr = w[jtab.T]  # w_qr[g, i]
    m = mm_fp(w_pq, w_qr, p)
    return modp.summod(modp.mulmod(m, w_pr, p), p)


def _sum_cubic(s: Structure, f: Expr, wv: dict, w, p: int) -> int:
    n = s.n
    r = np.arange(n)
    yz = modp.mulmod(wv["b"][:, None], wv["c"][None, :], p)
    total = 0
    step = _chunk_rows(n)
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        env = {"a": np.arange(lo, hi)[:, None, None], "b": r[None, :, None], "c": r[None, None, :]}
        vals = np.broadcast_to(evaluate(f, s, env), (hi - lo, n, n))
        inner = modp.summod(modp.mulmod(w[vals], yz[None, :, :], p), p, axis=(1, 2))
        total = (total + modp.dotmod(wv["a"][lo:hi], inner, p)) % p
    return total


_ROUTES = {Regime.QUADRATIC: _sum_quadratic, Regime.MATRIX: _sum_matrix, Regime.CUBIC: _sum_cubic}


def evaluate_weighted_sum(s: Structure, f: Expr, x, y, z, w, route: Regime | None = None,
                          p: int = modp.MERSENNE61) -> int:
    """P_f = sum over (a,b,c) of x_a y_b z_c w_{f(a,b,c)} mod p along the chosen route."""
    shape = classify_shape(f)
    route = shape if route is None else Regime(route)
    if route < shape:
        raise RouteTooWeak(f"{f} is {shape}, cannot use the {route} route")
    vecs = [modp.asmod(v, p) for v in (x, y, z, w)]
    for v in vecs:
        if v.shape != (s.n,):
            raise DimensionMismatch(f"weight vectors must have length {s.n}")
    return _ROUTES[route](s, f, _weights_by_var(*vecs[:3]), vecs[3], p)


def verify_identity(s: Structure, ident: Identity, cfg: FieldConfig = FieldConfig(),
                    route: Regime | None = None) -> Verdict:
    """Randomised check along the cheapest route; Fails is always sound."""
    _require_ops(s, ident)
    p = cfg.p
    if p <= 4 * s.n:
        raise PrimeTooSmall(f"p={p} must exceed 4n={4 * s.n}")
    try:
        regime = classify_identity(ident)
    except SubexpressionPair:
        v = brute_force_verify(s, ident)
        return Verdict(v.holds, 0.0, v.witness, "subexpression pair: brute-force fallback",
                       "brute", Regime.CUBIC)
    use = regime if route is None else max(regime, Regime(route))
    n = s.n
    for t in range(cfg.trials):
        rng = cfg.rng(t)
        x, y, z, w = (modp.random_vector(rng, n, p) for _ in range(4))
        wv = _weights_by_var(x, y, z)
        if isinstance(ident, ConstantTerm):
            lhs = _ROUTES[use](s, ident.f, wv, w, p)
            f0 = int(evaluate(ident.f, s, {"a": 0, "b": 0, "c": 0}))
            rhs = 1
            for v in (x, y, z):
                rhs = rhs * modp.summod(v, p) % p
            rhs = rhs * int(w[f0]) % p
        else:
            lhs = _ROUTES[use](s, ident.lhs, wv, w, p)
            rhs = _ROUTES[use](s, ident.rhs, wv, w, p)
        if lhs != rhs:
            return fails(None, engine="pit", regime=use)
    return holds((4 / p) ** cfg.trials, engine="pit", regime=use)


# --- matrices --------------------------------------------------------------


def mm_fp(A, B, p: int = modp.MERSENNE61, strassen_threshold: int | None = None) -> np.ndarray:
    """Exact matrix product over F_p."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
    return modp.matmul(modp.asmod(A, p), modp.asmod(B, p), p, strassen_threshold)


def freivalds_rounds(n: int) -> int:
    return max(1, math.ceil(8 * math.log2(max(n, 2))))


def freivalds_distributivity(s: Structure, cfg: FieldConfig = FieldConfig(), rounds: int = 3,
                             vectors: int | None = None, add: str = "+", mul: str = "*") -> Verdict:
    """Randomised check of a*(b+c) = (a*b)+(a*c) with O(n^w log n) work per round."""
    for op in (add, mul):
        if op not in s.ops:
            raise MissingOperation(f"structure lacks {op!r}")
    n, p = s.n, cfg.p
    if p <= 4 * n:
        raise PrimeTooSmall(f"p={p} must exceed 4n={4 * n}")
    ell = vectors or freivalds_rounds(n)
    tadd = s.table(add).astype(np.int64)
    tmul = s.table(mul).astype(np.int64)
    rows = np.broadcast_to(np.arange(n)[:, None], (n, n)).ravel()
    for rnd in range(rounds):
        rng = cfg.rng(1000 + rnd)
        wts = modp.random_vector(rng, n, p)
        wb = np.broadcast_to(wts[:, None], (n, n)).ravel()
        # Y[r, i] = sum of w_b over b with b + i = r
        Y = modp.bincount_mod(tadd.ravel() * n + np.tile(np.arange(n), n), wb, n * n, p).reshape(n, n)
        # X'[a, k] = sum of w_b over b with a * b = k
        Xp = modp.bincount_mod(rows * n + tmul.ravel(), np.broadcast_to(wts[None, :], (n, n)).ravel(),
                               n * n, p).reshape(n, n)
        U = modp.random_vector(rng, (ell, n), p)
        batch = max(1, (1 << 22) // (n * n))
        for lo in range(0, ell, batch):
            u = U[lo:lo + batch]
            m = len(u)
            left_x = u[:, tmul].reshape(m * n, n)  # row (j, a): u_j[a * r]
            left = mm_fp(left_x, Y, p).reshape(m, n, n)
            right_y = u[:, tadd].transpose(1, 0, 2).reshape(n, m * n)  # Y'_j[k, i] = u_j[k + i]
            z = mm_fp(Xp, right_y, p).reshape(n, m, n).transpose(1, 0, 2)
            right = np.take_along_axis(z, np.broadcast_to(tmul[None], (m, n, n)), axis=2)
            if not np.array_equal(left, right):
                return fails(None, engine="freivalds", regime=Regime.MATRIX)
    per_round = 1 / p + float(p) ** (-ell)
    return holds(per_round ** rounds, engine="freivalds", regime=Regime.MATRIX)


def count_distributive_triples(s: Structure, add: str = "+", mul: str = "*") -> int:
    """Number of (a,b,c) with a*(b+c) = (a*b)+(a*c)."""
    tadd = s.table(add)
    tmul = s.table(mul)
    flat = tadd.ravel()
    n = s.n
    # the count only depends on the row of a in the multiplication table
    rows, mult = np.unique(tmul, axis=0, return_counts=True)
    total = 0
    for row, m in zip(rows, mult):
        lhs = row[tadd]
        idx = row.astype(np.int64)
        rhs = flat[idx[:, None] * n + idx[None, :]]
        total += int(m) * int(np.count_nonzero(lhs == rhs))
    return total
