"""Exact integer linear algebra: normal forms, kernels, saturation tests.

Everything here runs on arbitrary-precision Python ints. Intermediate
entries of HNF/SNF eliminations overflow 64-bit even for small inputs,
so no numpy integer dtypes are used anywhere in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class DependentVectorsError(ValueError):
    """Input vectors are linearly dependent; carries a rational witness.

    ``witness`` is a nonzero rational coefficient vector c with
    sum_i c_i * v_i = 0.
    """

    def __init__(self, witness: tuple[Fraction, ...]):
        self.witness = witness
        super().__init__(f"vectors are linearly dependent: witness {witness}")


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix stored as a tuple of row tuples."""

    data: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for row in self.data:
            if self.data and len(row) != len(self.data[0]):
                raise ValueError("ragged rows")
            for x in row:
                if not isinstance(x, int):
                    raise TypeError(f"entries must be int, got {type(x).__name__}")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]]) -> "IntMatrix":
        return cls(tuple(tuple(int(x) for x in row) for row in rows))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(tuple((0,) * cols for _ in range(rows)))

    @property
    def rows(self) -> int:
        return len(self.data)

    @property
    def cols(self) -> int:
        return len(self.data[0]) if self.data else 0

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.data))) if self.data else IntMatrix(())

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.data)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        ot = other.transpose().data
        return IntMatrix(
            tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in ot) for row in self.data)
        )

    def mul_vec(self, v: Sequence) -> tuple:
        if self.cols != len(v):
            raise ValueError("length mismatch")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.data)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)


@dataclass(frozen=True)
class SnfResult:
    """Smith normal form ``left @ m @ right = diag`` with unimodular factors.

    ``diag`` holds the elementary divisors, nonnegative and ordered so each
    divides the next; trailing entries may be zero.
    """

    diag: tuple[int, ...]
    left: IntMatrix
    right: IntMatrix


def gcd_vector(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = math.gcd(g, x)
    return g


def is_primitive(v: Sequence[int]) -> bool:
    """True iff the integer vector has gcd 1. Rejects the zero vector."""
    if all(x == 0 for x in v):
        raise ValueError("zero vector has no primitivity")
    return gcd_vector(v) == 1


def make_primitive(v: Sequence[int]) -> tuple[int, ...]:
    """Divide an integer vector by the gcd of its entries."""
    g = gcd_vector(v)
    if g == 0:
        raise ValueError("zero vector")
    return tuple(x // g for x in v)


def _swap_cols(rows: list[list[int]], i: int, j: int) -> None:
    for row in rows:
        row[i], row[j] = row[j], row[i]


def _addmul_col(rows: list[list[int]], dst: int, src: int, factor: int) -> None:
    for row in rows:
        row[dst] += factor * row[src]


def _negate_col(rows: list[list[int]], j: int) -> None:
    for row in rows:
        row[j] = -row[j]


def hermite_normal_form(m: IntMatrix) -> IntMatrix:
    """Column-style Hermite normal form of an integer matrix.

    Unimodular column operations only, so the integer column span is
    preserved. Pivots are positive, sit on the earliest possible rows,
    and entries left of a pivot in its row are reduced into [0, pivot).
    Zero columns are pushed to the right.
    """
    rows = [list(r) for r in m.data]
    nrows = m.rows
    ncols = m.cols
    pivot_col = 0
    for r in range(nrows):
        if pivot_col >= ncols:
            break
        # gcd-out row r across columns >= pivot_col by euclidean column ops
        while True:
            nz = [j for j in range(pivot_col, ncols) if rows[r][j] != 0]
            if not nz:
                break
            jmin = min(nz, key=lambda j: abs(rows[r][j]))
            if jmin != pivot_col:
                _swap_cols(rows, pivot_col, jmin)
            if rows[r][pivot_col] < 0:
                _negate_col(rows, pivot_col)
            done = True
            for j in range(pivot_col + 1, ncols):
                if rows[r][j] != 0:
                    q = rows[r][j] // rows[r][pivot_col]
                    _addmul_col(rows, j, pivot_col, -q)
                    if rows[r][j] != 0:
                        done = False
            if done:
                break
        if rows[r][pivot_col] != 0:
            piv = rows[r][pivot_col]
            for j in range(pivot_col):
                q = rows[r][j] // piv
                if q != 0:
                    _addmul_col(rows, j, pivot_col, -q)
            pivot_col += 1
    return IntMatrix.from_rows(rows)


def smith_normal_form(m: IntMatrix) -> SnfResult:
    """Smith normal form with unimodular transforms, exact over the integers.

    Classic alternating row/column elimination. Whenever the pivot fails to
    divide an entry of the trailing block, the violating row is folded into
    the pivot row and elimination re-runs at the same index; this terminates
    because the pivot magnitude strictly decreases each time.
    """
    a = [list(r) for r in m.data]
    nrows, ncols = m.rows, m.cols
    left = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)]
    right = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def eliminate_at(t: int) -> None:
        while True:
            pos = None
            best = None
            for i in range(t, nrows):
                for j in range(t, ncols):
                    if a[i][j] != 0 and (best is None or abs(a[i][j]) < best):
                        best = abs(a[i][j])
                        pos = (i, j)
            if pos is None:
                return
            i, j = pos
            if i != t:
                a[t], a[i] = a[i], a[t]
                left[t], left[i] = left[i], left[t]
            if j != t:
                _swap_cols(a, t, j)
                _swap_cols(right, t, j)
            if a[t][t] < 0:
                a[t] = [-x for x in a[t]]
                left[t] = [-x for x in left[t]]
            clean = True
            for i in range(t + 1, nrows):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    left[i] = [x - q * y for x, y in zip(left[i], left[t])]
                    if a[i][t] != 0:
                        clean = False
            for j in range(t + 1, ncols):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    _addmul_col(a, j, t, -q)
                    _addmul_col(right, j, t, -q)
                    if a[t][j] != 0:
                        clean = False
            if clean:
                return

    n = min(nrows, ncols)
    for t in range(n):
        while True:
            eliminate_at(t)
            if a[t][t] == 0:
                break
            violator = None
            for i in range(t + 1, nrows):
                for j in range(t + 1, ncols):
                    if a[i][j] % a[t][t] != 0:
                        violator = i
                        break
                if violator is not None:
                    break
            if violator is None:
                break
            a[t] = [x + y for x, y in zip(a[t], a[violator])]
            left[t] = [x + y for x, y in zip(left[t], left[violator])]
    diag = tuple(a[i][i] for i in range(n))
    return SnfResult(diag, IntMatrix.from_rows(left), IntMatrix.from_rows(right))


def integer_kernel_basis(m: IntMatrix) -> IntMatrix:
    """Saturated lattice basis of {v in Z^cols : m v = 0}, as matrix columns.

    Reads the kernel off the right SNF transform: columns of ``right``
    matching zero elementary divisors form a direct-summand basis, so the
    result is automatically saturated. Columns are canonicalized by the
    column HNF so repeated runs agree exactly.
    """
    snf = smith_normal_form(m)
    ncols = m.cols
    diag = list(snf.diag) + [0] * (ncols - len(snf.diag))
    kernel_cols = [snf.right.column(j) for j in range(ncols) if diag[j] == 0]
    if not kernel_cols:
        return IntMatrix.from_rows([() for _ in range(ncols)])
    basis = IntMatrix.from_rows(list(zip(*kernel_cols)))
    return hermite_normal_form(basis)


def det_int(m: IntMatrix) -> int:
    """Exact determinant of a square integer matrix by Bareiss elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant needs a square matrix")
    a = [list(r) for r in m.data]
    n = m.rows
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rational_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank over the rationals via exact fraction elimination."""
    mat = [[Fraction(x) for x in row] for row in rows]
    nrows = len(mat)
    ncols = len(mat[0]) if mat else 0
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, nrows) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = mat[rank][c]
        mat[rank] = [x / inv for x in mat[rank]]
        for i in range(nrows):
            if i != rank and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def rational_nullspace(rows: Sequence[Sequence[int]]) -> list[tuple[Fraction, ...]]:
    """Basis of the rational null space {v : rows @ v = 0}."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    mat = [[Fraction(x) for x in row] for row in rows]
    piv_cols: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = mat[r][c]
        mat[r] = [x / inv for x in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        piv_cols.append(c)
        r += 1
        if r == nrows:
            break
    basis = []
    for free in (c for c in range(ncols) if c not in piv_cols):
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for i, pc in enumerate(piv_cols):
            v[pc] = -mat[i][free]
        basis.append(tuple(v))
    return basis


def solve_rational(rows: Sequence[Sequence[int]], rhs: Sequence) -> tuple[Fraction, ...] | None:
    """One exact solution of rows @ x = rhs over Q, or None if inconsistent."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    mat = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    piv_cols: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = mat[r][c]
        mat[r] = [x / inv for x in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        piv_cols.append(c)
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        if mat[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for i, pc in enumerate(piv_cols):
        x[pc] = mat[i][ncols]
    return tuple(x)


def is_saturated(vectors: Sequence[Sequence[int]], ambient_dim: int) -> bool:
    """Whether span_R{vectors} cut with Z^ambient equals span_Z{vectors}.

    Decided by the SNF elementary divisors of the stacked matrix: all equal
    to 1 means the vectors generate a direct summand of the ambient lattice.
    Linearly dependent input raises DependentVectorsError with a witness
    combination.
    """
    vecs = [tuple(int(x) for x in v) for v in vectors]
    if not vecs:
        return True
    if any(len(v) != ambient_dim for v in vecs):
        raise ValueError("vector length does not match ambient dimension")
    if rational_rank(vecs) != len(vecs):
        cols = [[v[i] for v in vecs] for i in range(ambient_dim)]
        witness = rational_nullspace(cols)[0]
        raise DependentVectorsError(witness)
    snf = smith_normal_form(IntMatrix.from_rows(vecs))
    return all(d == 1 for d in snf.diag[: len(vecs)])
