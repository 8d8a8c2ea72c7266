"""Partition of {0..n} into 3-AP-free classes using base-q digit norms."""

from __future__ import annotations

from collections import defaultdict


def num_digits(n: int, q: int) -> int:
    d = 1
    while q ** d <= n:
        d += 1
    return d


def behrend_class(x: int, q: int, digits: int) -> tuple:
    """(positions with digit >= q/2, squared norm of the digits after shifting those down)."""
    if q < 4 or q % 2:
        raise ValueError("q must be even and at least 4")
    high = []
    norm = 0
    for pos in range(digits):
        d = x % q
        x //= q
        if d >= q // 2:
            high.append(pos)
            d -= q // 2
        norm += d * d
    return (frozenset(high), norm)


def behrend_classes(n: int, q: int = 16) -> dict:
    """Map class key -> sorted members of {0..n}."""
    digits = num_digits(n, q)
    out = defaultdict(list)
    for x in range(n + 1):
        out[behrend_class(x, q, digits)].append(x)
    return dict(out)


def _key_order(key):
    high, norm = key
    return (sorted(high), norm)


def behrend_partition(n: int, q: int = 16) -> list[list[int]]:
    """Classes of {0..n}, each free of non-trivial 3-term progressions."""
    classes = behrend_classes(n, q)
    return [classes[k] for k in sorted(classes, key=_key_order)]


def shifted_partition(lo: int, hi: int, q: int = 4) -> list[list[int]]:
    """Behrend partition of the integer range [lo, hi]."""
    return [[x + lo for x in cls] for cls in behrend_partition(hi - lo, q)]
