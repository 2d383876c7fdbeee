"""Binary-field linear algebra on int bitsets.

A length-``k`` binary vector is stored as a Python ``int`` whose bit ``j`` is
entry ``j`` (block ``j + 1`` in one-based notation). XOR and reduction are
whole-word operations on the underlying limbs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class DimensionError(ValueError):
    """Operands have incompatible lengths."""


def popcount(v: int) -> int:
    return bin(v).count("1")


def support(v: int) -> list[int]:
    """Zero-based indices of the set bits of ``v``, ascending."""
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def from_indices(indices: Iterable[int]) -> int:
    v = 0
    for j in indices:
        v |= 1 << j
    return v


@dataclass(frozen=True)
class BitVector:
    """Fixed-length binary vector.

    ``str(BitVector.from_str("110"))`` round-trips; character ``j`` of the
    string is entry ``j``.
    """

    bits: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise DimensionError("length must be positive")
        if self.bits < 0 or self.bits >> self.length:
            raise DimensionError(f"bits do not fit in length {self.length}")

    @classmethod
    def from_str(cls, s: str) -> "BitVector":
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {s!r}")
        return cls(int(s[::-1], 2), len(s))

    def __str__(self) -> str:
        return format(self.bits, f"0{self.length}b")[::-1]

    def __xor__(self, other: "BitVector") -> "BitVector":
        return xor_into(self, other)

    def __len__(self) -> int:
        return self.length

    def popcount(self) -> int:
        return popcount(self.bits)


def xor_into(dst: BitVector, src: BitVector) -> BitVector:
    """Entry-wise XOR of two equal-length vectors."""
    if dst.length != src.length:
        raise DimensionError(f"length mismatch: {dst.length} vs {src.length}")
    return BitVector(dst.bits ^ src.bits, dst.length)


class PivotBasis:
    """Incremental row-echelon basis of a GF(2) row space.

    Each stored row has a distinct leading (lowest set) bit. Every reduction
    step clears the vector's lowest set bit without touching lower ones, so
    reducing costs at most one XOR per stored row.
    """

    __slots__ = ("ncols", "_pivots")

    def __init__(self, ncols: int, rows: Iterable[int] = ()):
        self.ncols = ncols
        self._pivots: dict[int, int] = {}
        for r in rows:
            self.add(r)

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def reduce(self, v: int) -> int:
        pivots = self._pivots
        while v:
            low = (v & -v).bit_length() - 1
            p = pivots.get(low)
            if p is None:
                return v
            v ^= p
        return 0

    def canonical(self, v: int) -> int:
        """Unique representative of ``v + span``: zero at every pivot bit."""
        for low in sorted(self._pivots):
            if (v >> low) & 1:
                v ^= self._pivots[low]
        return v

    def add(self, v: int) -> bool:
        """Insert ``v``; return True iff it increased the rank."""
        r = self.reduce(v)
        if not r:
            return False
        self._pivots[(r & -r).bit_length() - 1] = r
        return True

    def would_increase(self, v: int) -> bool:
        return self.reduce(v) != 0

    def copy(self) -> "PivotBasis":
        b = PivotBasis(self.ncols)
        b._pivots = dict(self._pivots)
        return b


class BitMatrix:
    """Ordered list of equal-length binary rows (ints)."""

    def __init__(self, rows: Sequence[int], ncols: int):
        rows = list(rows)
        for r in rows:
            if r < 0 or r >> ncols:
                raise DimensionError(f"row does not fit in {ncols} columns")
        self.rows = rows
        self.ncols = ncols
        self._basis: PivotBasis | None = None

    @classmethod
    def from_strings(cls, rows: Sequence[str]) -> "BitMatrix":
        vecs = [BitVector.from_str(s) for s in rows]
        if len({v.length for v in vecs}) > 1:
            raise DimensionError("rows have different lengths")
        return cls([v.bits for v in vecs], vecs[0].length if vecs else 0)

    @property
    def row_count(self) -> int:
        return len(self.rows)

    @property
    def col_count(self) -> int:
        return self.ncols

    def basis(self) -> PivotBasis:
        if self._basis is None:
            self._basis = PivotBasis(self.ncols, self.rows)
        return self._basis

    def append(self, v: int) -> None:
        if v < 0 or v >> self.ncols:
            raise DimensionError(f"row does not fit in {self.ncols} columns")
        self.rows.append(v)
        if self._basis is not None:
            self._basis.add(v)

    def __len__(self) -> int:
        return len(self.rows)


def _as_rows(m) -> tuple[list[int], int]:
    if isinstance(m, BitMatrix):
        return m.rows, m.ncols
    rows = list(m)
    return rows, max((r.bit_length() for r in rows), default=0)


def rank(m) -> int:
    """GF(2) rank of a BitMatrix or of an iterable of int rows."""
    if isinstance(m, BitMatrix):
        return m.basis().rank
    rows, ncols = _as_rows(m)
    return PivotBasis(ncols, rows).rank


def rank_would_increase(m: BitMatrix, candidate: BitVector | int) -> bool:
    """True iff appending ``candidate`` to ``m`` raises its rank."""
    if isinstance(candidate, BitVector):
        if candidate.length != m.ncols:
            raise DimensionError(
                f"candidate length {candidate.length} != {m.ncols} columns"
            )
        candidate = candidate.bits
    elif candidate < 0 or candidate >> m.ncols:
        raise DimensionError(f"candidate does not fit in {m.ncols} columns")
    return m.basis().would_increase(candidate)


def rank_gauss(rows: Sequence[int], ncols: int) -> int:
    """Textbook column-by-column Gauss-Jordan rank; reference implementation."""
    work = list(rows)
    r = 0
    for col in range(ncols):
        bit = 1 << col
        piv = next((i for i in range(r, len(work)) if work[i] & bit), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        for i in range(len(work)):
            if i != r and work[i] & bit:
                work[i] ^= work[r]
        r += 1
        if r == len(work):
            break
    return r
