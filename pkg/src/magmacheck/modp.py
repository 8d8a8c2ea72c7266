"""Exact vectorised arithmetic modulo a word-sized prime.

Values are stored as uint64 arrays with entries in [0, p).  The Mersenne
prime 2^61 - 1 gets a dedicated multiply; primes below 2^32 multiply
directly in 64 bits; anything else falls back to Python integers.
"""

from __future__ import annotations

import numpy as np

MERSENNE61 = (1 << 61) - 1
_M61 = np.uint64(MERSENNE61)
_LIMB = 21
_LIMB_MASK = np.uint64((1 << _LIMB) - 1)
# float64 sums stay exact below 2^53; limb products are < 2^42
_CHUNK = 1 << 11


def is_prime(p: int) -> bool:
    """Deterministic Miller-Rabin for 64-bit inputs."""
    if p < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if p % q == 0:
            return p == q
    d, r = p - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in small:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(r - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def _check(p: int):
    if p >= 1 << 63:
        raise ValueError("modulus must be below 2^63")


def asmod(a, p: int) -> np.ndarray:
    """Reduce an integer array (possibly negative) into [0, p) as uint64."""
    a = np.asarray(a)
    if a.dtype == object:
        return np.array([int(x) % p for x in a.ravel()], dtype=np.uint64).reshape(a.shape)
    if a.dtype.kind == "u":
        return (a.astype(np.uint64) % np.uint64(p)).astype(np.uint64)
    return np.mod(a.astype(np.int64), p).astype(np.uint64)


def _m61_reduce(x):
    x = (x & _M61) + (x >> np.uint64(61))
    return x - (x >= _M61).astype(np.uint64) * _M61


def _mul_m61(a, b):
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    s32 = np.uint64(32)
    lo32 = np.uint64(0xFFFFFFFF)
    ah, al = a >> s32, a & lo32
    bh, bl = b >> s32, b & lo32
    # a*b = ah*bh*2^64 + (ah*bl + al*bh)*2^32 + al*bl, and 2^64 = 8 (mod p)
    hi = (ah * bh) << np.uint64(3)
    mid = ah * bl + al * bh
    mid_term = (mid >> np.uint64(29)) + ((mid & np.uint64((1 << 29) - 1)) << s32)
    low = al * bl
    low = (low & _M61) + (low >> np.uint64(61))
    return _m61_reduce(_m61_reduce(hi + mid_term) + low)


def mulmod(a, b, p: int) -> np.ndarray:
    _check(p)
    if p == MERSENNE61:
        return _mul_m61(a, b)
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    if p < 1 << 32:
        return (a * b) % np.uint64(p)
    shape = np.broadcast_shapes(a.shape, b.shape)
    aa = np.broadcast_to(a, shape).astype(object)
    bb = np.broadcast_to(b, shape).astype(object)
    return np.asarray((aa * bb) % p, dtype=np.uint64).reshape(shape)


def addmod(a, b, p: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    s = a + b  # both < 2^63 so no wraparound
    return s - (s >= np.uint64(p)).astype(np.uint64) * np.uint64(p)


def submod(a, b, p: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    return a + (a < b).astype(np.uint64) * np.uint64(p) - b


def _limbs(a):
    a = np.asarray(a, dtype=np.uint64)
    return [(a >> np.uint64(_LIMB * k)) & _LIMB_MASK for k in range(3)]


def _combine(parts, p: int):
    """sum_k parts[k] * 2^(21k) mod p, for uint64 parts below 2^63."""
    acc = None
    for k, part in enumerate(parts):
        term = mulmod(asmod(part, p), np.uint64(pow(2, _LIMB * k, p)), p)
        acc = term if acc is None else addmod(acc, term, p)
    return acc


def summod(a, p: int, axis=None):
    """Exact sum mod p along an axis."""
    limbs = _limbs(a)
    parts = [np.sum(l, axis=axis, dtype=np.uint64) for l in limbs]
    out = _combine(parts, p)
    return int(out) if np.ndim(out) == 0 else out


def dotmod(a, b, p: int) -> int:
    return summod(mulmod(a, b, p), p)


def bincount_mod(idx, weights, minlength: int, p: int) -> np.ndarray:
    """out[t] = sum of weights[idx == t] mod p."""
    idx = np.asarray(idx).ravel()
    limbs = _limbs(np.asarray(weights).ravel())
    parts = []
    for l in limbs:
        c = np.bincount(idx, weights=l.astype(np.float64), minlength=minlength)
        parts.append(np.rint(c).astype(np.uint64))
    return _combine(parts, p)


def random_vector(rng: np.random.Generator, size, p: int) -> np.ndarray:
    return rng.integers(0, p, size=size, dtype=np.uint64)


def matmul_blocked(A, B, p: int) -> np.ndarray:
    """Cubic product mod p using three 21-bit limbs per entry and float64 BLAS."""
    A = np.asarray(A, dtype=np.uint64)
    B = np.asarray(B, dtype=np.uint64)
    m, k = A.shape
    n = B.shape[1]
    la = [x.astype(np.float64) for x in _limbs(A)]
    lb = [x.astype(np.float64) for x in _limbs(B)]
    acc = np.zeros((m, n), dtype=np.uint64)
    for start in range(0, max(k, 1), _CHUNK):
        stop = min(k, start + _CHUNK)
        if stop <= start:
            break
        diag = [np.zeros((m, n), dtype=np.uint64) for _ in range(5)]
        for i in range(3):
            ai = la[i][:, start:stop]
            for j in range(3):
                prod = ai @ lb[j][start:stop, :]
                diag[i + j] += np.rint(prod).astype(np.uint64)
        acc = addmod(acc, _combine_shifted(diag, p), p)
    return acc


def _combine_shifted(diag, p):
    acc = None
    for s, part in enumerate(diag):
        term = mulmod(asmod(part, p), np.uint64(pow(2, _LIMB * s, p)), p)
        acc = term if acc is None else addmod(acc, term, p)
    return acc


def matmul(A, B, p: int, strassen_threshold: int | None = None) -> np.ndarray:
    """A @ B mod p.  Strassen recursion kicks in above the threshold (off by default)."""
    A = np.asarray(A, dtype=np.uint64)
    B = np.asarray(B, dtype=np.uint64)
    if strassen_threshold is None or max(A.shape + B.shape) <= strassen_threshold:
        return matmul_blocked(A, B, p)
    return _strassen(A, B, p, strassen_threshold)


def _strassen(A, B, p, threshold):
    m, k = A.shape
    n = B.shape[1]
    size = max(m, k, n)
    if size <= threshold:
        return matmul_blocked(A, B, p)
    h = (size + 1) // 2
    pa = np.zeros((2 * h, 2 * h), dtype=np.uint64)
    pb = np.zeros((2 * h, 2 * h), dtype=np.uint64)
    pa[:m, :k] = A
    pb[:k, :n] = B
    a11, a12, a21, a22 = pa[:h, :h], pa[:h, h:], pa[h:, :h], pa[h:, h:]
    b11, b12, b21, b22 = pb[:h, :h], pb[:h, h:], pb[h:, :h], pb[h:, h:]
    add = lambda x, y: addmod(x, y, p)  # noqa: E731
    sub = lambda x, y: submod(x, y, p)  # noqa: E731
    rec = lambda x, y: _strassen(x, y, p, threshold)  # noqa: E731
    m1 = rec(add(a11, a22), add(b11, b22))
    m2 = rec(add(a21, a22), b11)
    m3 = rec(a11, sub(b12, b22))
    m4 = rec(a22, sub(b21, b11))
    m5 = rec(add(a11, a12), b22)
    m6 = rec(sub(a21, a11), add(b11, b12))
    m7 = rec(sub(a12, a22), add(b21, b22))
    c = np.empty((2 * h, 2 * h), dtype=np.uint64)
    c[:h, :h] = add(sub(add(m1, m4), m5), m7)
    c[:h, h:] = add(m3, m5)
    c[h:, :h] = add(m2, m4)
    c[h:, h:] = add(add(sub(m1, m2), m3), m6)
    return c[:m, :n]
