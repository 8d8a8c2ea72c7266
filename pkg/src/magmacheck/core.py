"""Finite structures given by Cayley tables over the dense index set 0..n-1."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

MAGIC = "magma v1"


class MagmaError(Exception):
    """Base class for all library errors."""


class UnknownOperation(MagmaError):
    pass


class IndexOutOfRange(MagmaError):
    pass


class ParseError(MagmaError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EntryOutOfRange(ParseError):
    pass


class DuplicateOperation(ParseError):
    pass


class InvalidSize(MagmaError):
    pass


def index_dtype(n: int) -> np.dtype:
    """Smallest unsigned dtype able to hold indices 0..n-1."""
    if n <= 1 << 8:
        return np.dtype(np.uint8)
    if n <= 1 << 16:
        return np.dtype(np.uint16)
    return np.dtype(np.uint32)


@dataclass(frozen=True, eq=False)
class Structure:
    """A set {0..n-1} with named binary operations and named constants.

    Tables are read-only numpy arrays; ``ops`` keeps declaration order.
    """

    n: int
    ops: tuple[str, ...]
    tables: Mapping[str, np.ndarray]
    constants: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSize(f"structure must have at least one element, got n={self.n}")
        if len(set(self.ops)) != len(self.ops):
            raise DuplicateOperation("duplicate operation symbol")
        dt = index_dtype(self.n)
        frozen = {}
        for op in self.ops:
            t = np.asarray(self.tables[op])
            if t.shape != (self.n, self.n):
                raise InvalidSize(f"table for {op!r} has shape {t.shape}, expected {(self.n, self.n)}")
            if t.size and (t.min() < 0 or t.max() >= self.n):
                raise IndexOutOfRange(f"table for {op!r} has entries outside 0..{self.n - 1}")
            t = t.astype(dt, copy=True)
            t.setflags(write=False)
            frozen[op] = t
        object.__setattr__(self, "tables", frozen)
        consts = dict(self.constants)
        for name, v in consts.items():
            if not 0 <= v < self.n:
                raise IndexOutOfRange(f"constant {name}={v} outside 0..{self.n - 1}")
        object.__setattr__(self, "constants", consts)

    def table(self, op: str) -> np.ndarray:
        try:
            return self.tables[op]
        except KeyError:
            raise UnknownOperation(op) from None

    def apply(self, op: str, x: int, y: int) -> int:
        t = self.table(op)
        if not (0 <= x < self.n and 0 <= y < self.n):
            raise IndexOutOfRange(f"({x}, {y}) outside 0..{self.n - 1}")
        return int(t[x, y])

    def const(self, name: str) -> int:
        return self.constants[name]

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.n == other.n
            and self.ops == other.ops
            and self.constants == other.constants
            and all(np.array_equal(self.tables[o], other.tables[o]) for o in self.ops)
        )

    def __hash__(self):
        return hash((self.n, self.ops, tuple(sorted(self.constants.items()))))

    def __repr__(self):
        return f"Structure(n={self.n}, ops={self.ops}, constants={self.constants})"


def make_structure(n: int, tables: Mapping[str, Iterable], constants: Mapping[str, int] | None = None) -> Structure:
    """Build a structure; operation order follows the mapping's order."""
    return Structure(n, tuple(tables), {k: np.asarray(v) for k, v in tables.items()}, dict(constants or {}))


def make_zn(n: int, with_multiplication: bool = False) -> Structure:
    """Z_n with '+' and optionally '*' (both mod n), constant zero=0."""
    if n < 1:
        raise InvalidSize("n must be positive")
    r = np.arange(n)
    tables = {"+": (r[:, None] + r[None, :]) % n}
    if with_multiplication:
        tables["*"] = (r[:, None] * r[None, :]) % n
    return make_structure(n, tables, {"zero": 0})


def mutate_entry(s: Structure, op: str, i: int, j: int, v: int) -> Structure:
    """Copy of ``s`` with the single entry op(i, j) replaced by v."""
    t = s.table(op)
    if not (0 <= i < s.n and 0 <= j < s.n and 0 <= v < s.n):
        raise IndexOutOfRange(f"({i}, {j}) -> {v} outside 0..{s.n - 1}")
    tables = {o: s.tables[o] for o in s.ops}
    new = t.copy()
    new[i, j] = v
    tables[op] = new
    return Structure(s.n, s.ops, tables, dict(s.constants))


def with_tables(s: Structure, **changes) -> Structure:
    tables = {o: s.tables[o] for o in s.ops}
    tables.update(changes)
    ops = s.ops + tuple(k for k in changes if k not in s.ops)
    return Structure(s.n, ops, tables, dict(s.constants))


def _parse_header(line: str, key: str, lineno: int) -> str:
    prefix = key + "="
    if not line.startswith(prefix):
        raise ParseError(f"expected '{prefix}...'", lineno)
    return line[len(prefix):]


def parse_structure(text: str) -> Structure:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln.rstrip("\r") for ln in lines]
    if not lines or lines[0].strip() != MAGIC:
        raise ParseError(f"missing '{MAGIC}' header", 1)
    if len(lines) < 3:
        raise ParseError("truncated header", len(lines) + 1)
    try:
        n = int(_parse_header(lines[1].strip(), "n", 2))
    except ValueError:
        raise ParseError("n must be an integer", 2) from None
    if n < 1:
        raise ParseError("n must be positive", 2)
    raw_ops = _parse_header(lines[2].strip(), "ops", 3)
    ops = [o.strip() for o in raw_ops.split(",")]
    if not ops or any(not o for o in ops):
        raise ParseError("empty operation symbol", 3)
    seen = set()
    for o in ops:
        if o in seen:
            raise DuplicateOperation(f"operation {o!r} declared twice", 3)
        seen.add(o)
    pos = 3
    constants: dict[str, int] = {}
    while pos < len(lines) and lines[pos].startswith("const "):
        body = lines[pos][len("const "):].strip()
        name, eq, val = body.partition("=")
        if not eq or not name.strip():
            raise ParseError("malformed constant line", pos + 1)
        try:
            v = int(val)
        except ValueError:
            raise ParseError("constant value must be an integer", pos + 1) from None
        if not 0 <= v < n:
            raise EntryOutOfRange(f"constant {name.strip()}={v} outside 0..{n - 1}", pos + 1)
        constants[name.strip()] = v
        pos += 1
    tables = {}
    for op in ops:
        rows = []
        for _ in range(n):
            if pos >= len(lines):
                raise ParseError(f"table for {op!r} is truncated", pos + 1)
            parts = lines[pos].split()
            if len(parts) != n:
                raise ParseError(f"expected {n} entries, found {len(parts)}", pos + 1)
            try:
                row = [int(p) for p in parts]
            except ValueError:
                raise ParseError("non-integer entry", pos + 1) from None
            for v in row:
                if not 0 <= v < n:
                    raise EntryOutOfRange(f"entry {v} outside 0..{n - 1}", pos + 1)
            rows.append(row)
            pos += 1
        tables[op] = np.array(rows, dtype=np.int64).reshape(n, n)
    if any(ln.strip() for ln in lines[pos:]):
        raise ParseError("unexpected trailing content", pos + 1)
    return Structure(n, tuple(ops), tables, constants)


def format_structure(s: Structure) -> str:
    out = [MAGIC, f"n={s.n}", "ops=" + ",".join(s.ops)]
    out += [f"const {k}={v}" for k, v in s.constants.items()]
    for op in s.ops:
        for row in s.tables[op]:
            out.append(" ".join(str(int(v)) for v in row))
    return "\n".join(out) + "\n"


def load_structure(path) -> Structure:
    return parse_structure(Path(path).read_text())


def save_structure(s: Structure, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_structure(s))


def restrict(s: Structure, op: str, elements: Iterable[int]) -> tuple[Structure, list[int]]:
    """Substructure of ``op`` on a closed subset, reindexed densely.

    Returns the new single-operation structure and the list mapping new
    indices back to old ones.  Raises ValueError if the subset is not closed.
    """
    elems = sorted(set(int(e) for e in elements))
    lookup = np.full(s.n, -1, dtype=np.int64)
    lookup[elems] = np.arange(len(elems))
    sub = s.table(op)[np.ix_(elems, elems)]
    mapped = lookup[sub]
    if (mapped < 0).any():
        raise ValueError(f"subset is not closed under {op!r}")
    return make_structure(len(elems), {op: mapped}), elems
