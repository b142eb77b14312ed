"""Dense matrices over a prime field, with row/column block partitioning.

Matrices are immutable after construction and all operations are pure
functions, so values can be shared freely (e.g. across parallel maps over
blocks). Entries are stored as plain reduced ints in row-major order;
exactness comes from doing every reduction modulo the field's prime.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .field import FieldElement, FieldMismatchError, PrimeField

ROW = "row"
COL = "col"


class DimensionError(ValueError):
    """Shapes or partition boundaries do not conform."""


class OpCounter:
    """Tally of multiply-accumulate operations applied to matrix entries.

    One MAC = one entry-level multiply feeding an accumulation. Scalar
    bookkeeping (e.g. computing interpolation weights) is not counted;
    the counters mirror the dimensional products of the cost model.
    """

    __slots__ = ("macs",)

    def __init__(self) -> None:
        self.macs = 0

    def tick(self, n: int) -> None:
        self.macs += n


class FieldMatrix:
    """Immutable row-major matrix over GF(p). Zero-extent matrices are legal."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: PrimeField, rows: int, cols: int, data: Iterable[int]):
        if rows < 0 or cols < 0:
            raise DimensionError(f"negative shape {rows}x{cols}")
        p = field.modulus
        entries = tuple(v % p for v in data)
        if len(entries) != rows * cols:
            raise DimensionError(
                f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}"
            )
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", entries)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("FieldMatrix is immutable")

    @classmethod
    def zeros(cls, field: PrimeField, rows: int, cols: int) -> "FieldMatrix":
        return cls(field, rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, field: PrimeField, n: int) -> "FieldMatrix":
        return cls(field, n, n, (1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def from_rows(cls, field: PrimeField, rows: Sequence[Sequence[int]]) -> "FieldMatrix":
        n_rows = len(rows)
        n_cols = len(rows[0]) if n_rows else 0
        if any(len(r) != n_cols for r in rows):
            raise DimensionError("ragged row lengths")
        return cls(field, n_rows, n_cols, (v for r in rows for v in r))

    @classmethod
    def random(cls, field: PrimeField, rows: int, cols: int, rng: random.Random) -> "FieldMatrix":
        p = field.modulus
        return cls(field, rows, cols, (rng.randrange(p) for _ in range(rows * cols)))

    def at(self, i: int, j: int) -> int:
        return self.data[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.data[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def size(self) -> int:
        """Number of stored field elements (the unit of all cost accounting)."""
        return self.rows * self.cols

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldMatrix)
            and self.field.modulus == other.field.modulus
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self) -> int:
        return hash((self.field.modulus, self.rows, self.cols, self.data))

    def __repr__(self) -> str:
        return f"FieldMatrix({self.rows}x{self.cols} mod {self.field.modulus})"


@dataclass(frozen=True)
class BlockPartition:
    """Split offsets along one axis; the last boundary must equal the extent."""

    axis: str
    boundaries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.axis not in (ROW, COL):
            raise DimensionError(f"axis must be {ROW!r} or {COL!r}: {self.axis!r}")
        bounds = tuple(self.boundaries)
        if not bounds:
            raise DimensionError("empty partition")
        if bounds[0] <= 0 or any(b >= c for b, c in zip(bounds, bounds[1:])):
            raise DimensionError(f"boundaries must be strictly increasing: {bounds}")
        object.__setattr__(self, "boundaries", bounds)

    @classmethod
    def equal(cls, axis: str, extent: int, parts: int) -> "BlockPartition":
        if parts <= 0 or extent % parts != 0:
            raise DimensionError(f"extent {extent} not divisible into {parts} equal blocks")
        step = extent // parts
        return cls(axis, tuple(step * k for k in range(1, parts + 1)))


def _check_same_field(a: FieldMatrix, b: FieldMatrix) -> None:
    if a.field.modulus != b.field.modulus:
        raise FieldMismatchError(f"mixed moduli: {a.field.modulus} vs {b.field.modulus}")


def matmul(a: FieldMatrix, b: FieldMatrix, counter: OpCounter | None = None) -> FieldMatrix:
    """Exact product over GF(p). Counts a.rows * a.cols * b.cols MACs."""
    _check_same_field(a, b)
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    p = a.field.modulus
    k, c = a.cols, b.cols
    bd = b.data
    b_cols = [bd[j::c] for j in range(c)]
    out: list[int] = []
    for i in range(a.rows):
        a_row = a.data[i * k : (i + 1) * k]
        for b_col in b_cols:
            out.append(sum(map(int.__mul__, a_row, b_col)) % p)
    if counter is not None:
        counter.tick(a.rows * k * c)
    return FieldMatrix(a.field, a.rows, c, out)


def add(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    _check_same_field(a, b)
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise DimensionError(f"shape mismatch {a.rows}x{a.cols} vs {b.rows}x{b.cols}")
    p = a.field.modulus
    return FieldMatrix(a.field, a.rows, a.cols, ((x + y) % p for x, y in zip(a.data, b.data)))


def scale_add(
    acc: FieldMatrix, m: FieldMatrix, c: FieldElement, counter: OpCounter | None = None
) -> FieldMatrix:
    """acc + c*m elementwise; counts one MAC per entry."""
    _check_same_field(acc, m)
    if (acc.rows, acc.cols) != (m.rows, m.cols):
        raise DimensionError(f"shape mismatch {acc.rows}x{acc.cols} vs {m.rows}x{m.cols}")
    if c.field.modulus != acc.field.modulus:
        raise FieldMismatchError("scalar from a different field")
    p = acc.field.modulus
    cv = c.value
    if counter is not None:
        counter.tick(acc.size)
    return FieldMatrix(
        acc.field, acc.rows, acc.cols, ((x + cv * y) % p for x, y in zip(acc.data, m.data))
    )


def row_slice(m: FieldMatrix, start: int, stop: int) -> FieldMatrix:
    if not 0 <= start <= stop <= m.rows:
        raise DimensionError(f"row slice [{start}, {stop}) outside 0..{m.rows}")
    return FieldMatrix(m.field, stop - start, m.cols, m.data[start * m.cols : stop * m.cols])


def col_slice(m: FieldMatrix, start: int, stop: int) -> FieldMatrix:
    if not 0 <= start <= stop <= m.cols:
        raise DimensionError(f"col slice [{start}, {stop}) outside 0..{m.cols}")
    picked: list[int] = []
    for i in range(m.rows):
        base = i * m.cols
        picked.extend(m.data[base + start : base + stop])
    return FieldMatrix(m.field, m.rows, stop - start, picked)


def split(m: FieldMatrix, part: BlockPartition) -> list[FieldMatrix]:
    """Cut m into blocks along part.axis; blocks concatenate back to m in order."""
    extent = m.rows if part.axis == ROW else m.cols
    if part.boundaries[-1] != extent:
        raise DimensionError(
            f"last boundary {part.boundaries[-1]} != {part.axis} extent {extent}"
        )
    take = row_slice if part.axis == ROW else col_slice
    blocks = []
    start = 0
    for stop in part.boundaries:
        blocks.append(take(m, start, stop))
        start = stop
    return blocks


def concat(blocks: Sequence[FieldMatrix], axis: str) -> FieldMatrix:
    """Inverse of split: join blocks along axis, preserving order."""
    if not blocks:
        raise DimensionError("cannot concat zero blocks")
    first = blocks[0]
    for b in blocks[1:]:
        _check_same_field(first, b)
    if axis == ROW:
        if any(b.cols != first.cols for b in blocks):
            raise DimensionError("row concat needs equal column counts")
        data: list[int] = []
        for b in blocks:
            data.extend(b.data)
        return FieldMatrix(first.field, sum(b.rows for b in blocks), first.cols, data)
    if axis == COL:
        if any(b.rows != first.rows for b in blocks):
            raise DimensionError("col concat needs equal row counts")
        data = []
        for i in range(first.rows):
            for b in blocks:
                data.extend(b.row(i))
        return FieldMatrix(first.field, first.rows, sum(b.cols for b in blocks), data)
    raise DimensionError(f"axis must be {ROW!r} or {COL!r}: {axis!r}")


def pad_to(m: FieldMatrix, rows: int, cols: int) -> FieldMatrix:
    """Embed m in the top-left corner of a rows x cols zero matrix."""
    if rows < m.rows or cols < m.cols:
        raise DimensionError(f"cannot pad {m.rows}x{m.cols} down to {rows}x{cols}")
    if (rows, cols) == (m.rows, m.cols):
        return m
    data: list[int] = []
    pad_cols = (0,) * (cols - m.cols)
    for i in range(m.rows):
        data.extend(m.row(i))
        data.extend(pad_cols)
    data.extend((0,) * ((rows - m.rows) * cols))
    return FieldMatrix(m.field, rows, cols, data)


def crop(m: FieldMatrix, rows: int, cols: int) -> FieldMatrix:
    """Take the top-left rows x cols corner (drops zero padding after decode)."""
    if rows > m.rows or cols > m.cols:
        raise DimensionError(f"cannot crop {m.rows}x{m.cols} up to {rows}x{cols}")
    if (rows, cols) == (m.rows, m.cols):
        return m
    data: list[int] = []
    for i in range(rows):
        data.extend(m.data[i * m.cols : i * m.cols + cols])
    return FieldMatrix(m.field, rows, cols, data)
