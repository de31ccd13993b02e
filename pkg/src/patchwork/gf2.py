"""Exact linear algebra over the two-element field.

Vectors are bit masks (bit ``i`` is coordinate ``i``), matrices keep one mask
per row, and subspaces are stored in reduced row-echelon form so that equal
subspaces compare equal structurally.  Everything is immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


def _low_bit(mask: int) -> int:
    """Index of the lowest set bit; mask must be non-zero."""
    return (mask & -mask).bit_length() - 1


@dataclass(frozen=True)
class BitVector:
    """A vector in GF(2)^length. Addition is coordinatewise XOR."""

    length: int
    mask: int = 0

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("negative length")
        if self.mask >> self.length:
            raise ValueError("mask has bits beyond length")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        bits = list(bits)
        mask = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError("entries must be 0 or 1")
            mask |= b << i
        return cls(len(bits), mask)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.mask >> i) & 1 for i in range(self.length))

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVector(self.length, self.mask ^ other.mask)

    def dot(self, other: "BitVector") -> int:
        if self.length != other.length:
            raise ValueError("length mismatch")
        return (self.mask & other.mask).bit_count() & 1

    def is_zero(self) -> bool:
        return self.mask == 0


@dataclass(frozen=True)
class Gf2Matrix:
    """A rows x cols matrix over GF(2); row i is the mask row_masks[i]."""

    rows: int
    cols: int
    row_masks: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.row_masks) != self.rows:
            raise ValueError("row count mismatch")
        for r in self.row_masks:
            if r >> self.cols:
                raise ValueError("row has bits beyond cols")

    @classmethod
    def from_rows(cls, grid: Sequence[Sequence[int]], cols: int | None = None) -> "Gf2Matrix":
        grid = [list(r) for r in grid]
        if cols is None:
            cols = len(grid[0]) if grid else 0
        masks = []
        for row in grid:
            if len(row) != cols:
                raise ValueError("ragged rows")
            masks.append(BitVector.from_bits(row).mask)
        return cls(len(grid), cols, tuple(masks))

    @classmethod
    def zero(cls, rows: int, cols: int) -> "Gf2Matrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def from_columns(cls, columns: Sequence[int], rows: int) -> "Gf2Matrix":
        masks = [0] * rows
        for j, col in enumerate(columns):
            while col:
                i = _low_bit(col)
                col &= col - 1
                masks[i] |= 1 << j
        return cls(rows, len(columns), tuple(masks))

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @property
    def entries(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple((r >> j) & 1 for j in range(self.cols)) for r in self.row_masks)

    def column(self, j: int) -> int:
        """Column j as a mask over row indices."""
        out = 0
        for i, r in enumerate(self.row_masks):
            out |= ((r >> j) & 1) << i
        return out

    def columns(self) -> list[int]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "Gf2Matrix":
        return Gf2Matrix(self.cols, self.rows, tuple(self.columns()))

    def apply(self, x: int) -> int:
        """Matrix-vector product; x is a mask over cols, result over rows."""
        out = 0
        for i, r in enumerate(self.row_masks):
            out |= ((r & x).bit_count() & 1) << i
        return out

    def __matmul__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for r in self.row_masks:
            acc = 0
            m = r
            while m:
                k = _low_bit(m)
                m &= m - 1
                acc ^= other.row_masks[k]
            out.append(acc)
        return Gf2Matrix(self.rows, other.cols, tuple(out))

    def is_zero(self) -> bool:
        return all(r == 0 for r in self.row_masks)

    def stack(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.cols != other.cols:
            raise ValueError("shape mismatch")
        return Gf2Matrix(self.rows + other.rows, self.cols, self.row_masks + other.row_masks)


def rref(vectors: Iterable[int]) -> tuple[int, ...]:
    """Reduced row echelon form of the span, rows sorted by pivot."""
    pivots: dict[int, int] = {}
    for v in vectors:
        row = v
        for p, r in sorted(pivots.items()):
            if (row >> p) & 1:
                row ^= r
        if row:
            # back-substitute to clear the new pivot from existing rows
            p = _low_bit(row)
            for q in list(pivots):
                if (pivots[q] >> p) & 1:
                    pivots[q] ^= row
            pivots[p] = row
    return tuple(pivots[p] for p in sorted(pivots))


@dataclass(frozen=True)
class Subspace:
    """A subspace of GF(2)^ambient_dim with a canonical echelon basis."""

    ambient_dim: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        for r in self.rows:
            if r >> self.ambient_dim:
                raise ValueError("basis vector outside ambient space")
        if self.rows != rref(self.rows):
            raise ValueError("basis not in reduced echelon form")

    @classmethod
    def from_vectors(cls, vectors: Iterable[int], ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, rref(vectors))

    @classmethod
    def from_bitvectors(cls, vectors: Iterable[BitVector], ambient_dim: int) -> "Subspace":
        return cls.from_vectors((v.mask for v in vectors), ambient_dim)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, tuple(1 << i for i in range(ambient_dim)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def basis(self) -> tuple[BitVector, ...]:
        return tuple(BitVector(self.ambient_dim, r) for r in self.rows)

    def reduce(self, mask: int) -> int:
        """Remainder of mask after reduction against the basis."""
        for r in self.rows:
            p = _low_bit(r)
            if (mask >> p) & 1:
                mask ^= r
        return mask

    def member(self, mask: int) -> bool:
        return self.reduce(mask) == 0

    def contains(self, other: "Subspace") -> bool:
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        return all(self.member(r) for r in other.rows)

    def coordinates(self, mask: int) -> int:
        """Coefficients (as a mask over basis rows) expressing mask, which must lie in the subspace."""
        coeffs = 0
        for i, r in enumerate(self.rows):
            p = _low_bit(r)
            if (mask >> p) & 1:
                mask ^= r
                coeffs |= 1 << i
        if mask:
            raise ValueError("vector not in subspace")
        return coeffs

    def enumerate_vectors(self) -> list[int]:
        """All 2^dim member masks (small subspaces only)."""
        out = [0]
        for r in self.rows:
            out += [v ^ r for v in out]
        return out

    def basis_matrix(self) -> Gf2Matrix:
        """Matrix whose rows are the basis vectors."""
        return Gf2Matrix(len(self.rows), self.ambient_dim, self.rows)


class SpanSolver:
    """Incremental GF(2) solver: express targets in the span of generators."""

    def __init__(self, generators: Sequence[int]) -> None:
        self._pivots: dict[int, tuple[int, int]] = {}
        self._n = len(generators)
        for i, g in enumerate(generators):
            row, combo = g, 1 << i
            while row:
                p = _low_bit(row)
                if p in self._pivots:
                    r2, c2 = self._pivots[p]
                    row ^= r2
                    combo ^= c2
                else:
                    self._pivots[p] = (row, combo)
                    break

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def solve(self, target: int) -> int | None:
        """A generator-combination mask with XOR of chosen generators == target, or None."""
        row, combo = target, 0
        while row:
            p = _low_bit(row)
            if p not in self._pivots:
                return None
            r2, c2 = self._pivots[p]
            row ^= r2
            combo ^= c2
        return combo


def rank(matrix: Gf2Matrix) -> int:
    """GF(2) rank via Gaussian elimination."""
    return len(rref(matrix.row_masks))


def kernel_basis(matrix: Gf2Matrix) -> Subspace:
    """Canonical basis of the right kernel {x : Mx = 0}."""
    pivots: dict[int, tuple[int, int]] = {}
    kernel = []
    for j in range(matrix.cols):
        row, combo = matrix.column(j), 1 << j
        while row:
            p = _low_bit(row)
            if p in pivots:
                r2, c2 = pivots[p]
                row ^= r2
                combo ^= c2
            else:
                pivots[p] = (row, combo)
                break
        if row == 0:
            kernel.append(combo)
    return Subspace.from_vectors(kernel, matrix.cols)


def image_basis(matrix: Gf2Matrix) -> Subspace:
    """Canonical basis of the column space, as a subspace of GF(2)^rows."""
    return Subspace.from_vectors(matrix.columns(), matrix.rows)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    return Subspace.from_vectors(a.rows + b.rows, a.ambient_dim)


def subspace_intersection(a: Subspace, b: Subspace) -> Subspace:
    """Zassenhaus: reduce rows (v | v) for v in A and (w | 0) for w in B."""
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    n = a.ambient_dim
    stacked = [r | (r << n) for r in a.rows] + list(b.rows)
    low = (1 << n) - 1
    reduced = rref(stacked)
    inter = [r >> n for r in reduced if (r & low) == 0]
    return Subspace.from_vectors(inter, n)


def preimage_subspace(matrix: Gf2Matrix, w: Subspace) -> Subspace:
    """Canonical basis of {x : Mx in W}."""
    if w.ambient_dim != matrix.rows:
        raise ValueError("ambient dimension mismatch")
    # W as the solution set of its annihilator, then pull back through M.
    annihilator = kernel_basis(w.basis_matrix())
    constraint_rows = []
    for f in annihilator.rows:
        acc = 0
        m = f
        while m:
            k = _low_bit(m)
            m &= m - 1
            acc ^= matrix.row_masks[k]
        constraint_rows.append(acc)
    constraints = Gf2Matrix(len(constraint_rows), matrix.cols, tuple(constraint_rows))
    return kernel_basis(constraints)


def quotient_dim(b: Subspace, a: Subspace) -> int:
    """dim(B/A); raises if A is not contained in B."""
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    if not b.contains(a):
        raise ValueError("A is not contained in B")
    return b.dim - a.dim


def det(matrix: Gf2Matrix) -> int:
    """Determinant over GF(2) of a square matrix (the empty matrix has det 1)."""
    if matrix.rows != matrix.cols:
        raise ValueError("determinant of non-square matrix")
    rows = list(matrix.row_masks)
    n = matrix.cols
    for j in range(n):
        pivot = None
        for i in range(j, n):
            if (rows[i] >> j) & 1:
                pivot = i
                break
        if pivot is None:
            return 0
        rows[j], rows[pivot] = rows[pivot], rows[j]
        for i in range(n):
            if i != j and ((rows[i] >> j) & 1):
                rows[i] ^= rows[j]
    return 1
