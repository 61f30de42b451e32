"""Quotient bookkeeping for the cone construction.

The facet normals assemble into an integer matrix mapping R^d onto R^{n+1};
its integer kernel pins the subtorus one quotients by, and the 2-torsion of
that subtorus is the deck group of the real locus covering. Everything here
is exact: F_2 linear algebra for the deck group, rational least squares for
the Reeb coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Sequence, Union

import numpy as np

from .cone import ConeSpec, ValidationReport, validate
from .lattice import IntMatrix, integer_kernel_basis, smith_normal_form, solve_rational


class InvalidConeError(ValueError):
    """Cone failed validation; carries the offending report."""

    def __init__(self, report: ValidationReport):
        self.report = report
        failed = [c.name for c in report.checks if not c.passed]
        super().__init__(f"cone validation failed: {failed}")


@dataclass(frozen=True)
class DelzantData:
    """Exact-sequence data of a validated cone.

    ``normal_matrix`` is (n+1) x d with the facet normals as columns;
    ``kernel_basis`` is d x k, a saturated basis of its integer kernel,
    canonicalized so runs are reproducible. ``torsion_rank`` counts the
    elementary divisors of the normal matrix exceeding 1; zero means the
    normals generate the full ambient lattice and the quotient subtorus
    is connected.
    """

    cone: ConeSpec
    normal_matrix: IntMatrix
    kernel_basis: IntMatrix
    torsion_rank: int

    @property
    def d(self) -> int:
        return self.normal_matrix.cols

    @property
    def k(self) -> int:
        return self.kernel_basis.cols


def build(cone: ConeSpec, report: Optional[ValidationReport] = None) -> DelzantData:
    """Assemble DelzantData for a good cone; validation failures propagate."""
    if report is None:
        report = validate(cone)
    if not report.passed:
        raise InvalidConeError(report)
    beta = IntMatrix.from_rows(
        [tuple(lam[i] for lam in cone.normals) for i in range(cone.dim)]
    )
    kernel = integer_kernel_basis(beta)
    assert (beta @ kernel).is_zero() if kernel.cols else True
    divisors = smith_normal_form(beta).diag
    torsion = sum(1 for dv in divisors if dv > 1)
    return DelzantData(cone, beta, kernel, torsion)


@dataclass(frozen=True)
class DeckGroup:
    """Sign-vector group acting by coordinate negation, group law XOR.

    Elements are 0/1 tuples of length d; entry 1 flips the sign of that
    coordinate. The identity is the zero vector.
    """

    elements: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def nontrivial(self) -> list[tuple[int, ...]]:
        return [e for e in self.elements if any(e)]

    def apply(self, element: tuple[int, ...], x: np.ndarray) -> np.ndarray:
        signs = np.array([-1.0 if s else 1.0 for s in element])
        return x * signs


def _f2_kernel_basis(rows: Sequence[Sequence[int]], width: int) -> list[tuple[int, ...]]:
    """Basis of the null space over GF(2) of the given row list."""
    mat = [[x & 1 for x in row] for row in rows]
    nrows = len(mat)
    piv_cols: list[int] = []
    r = 0
    for c in range(width):
        piv = next((i for i in range(r, nrows) if mat[i][c]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        for i in range(nrows):
            if i != r and mat[i][c]:
                mat[i] = [a ^ b for a, b in zip(mat[i], mat[r])]
        piv_cols.append(c)
        r += 1
        if r == nrows:
            break
    basis = []
    for free in (c for c in range(width) if c not in piv_cols):
        v = [0] * width
        v[free] = 1
        for i, pc in enumerate(piv_cols):
            v[pc] = mat[i][free]
        basis.append(tuple(v))
    return basis


def _span_f2(basis: list[tuple[int, ...]], width: int) -> tuple[tuple[int, ...], ...]:
    elements = {tuple([0] * width)}
    for vec in basis:
        elements |= {tuple(a ^ b for a, b in zip(e, vec)) for e in elements}
    return tuple(sorted(elements))


def deck_group(data: DelzantData) -> DeckGroup:
    """2-torsion of the quotient subtorus: the GF(2) kernel of the normal matrix.

    A sign vector s belongs iff sum_j (s_j/2) * normal_j is integral, i.e.
    the normal columns selected by s sum to an even vector.
    """
    basis = _f2_kernel_basis(data.normal_matrix.data, data.d)
    return DeckGroup(_span_f2(basis, data.d))


def deck_group_from_flow(data: DelzantData) -> DeckGroup:
    """2-torsion reached along the quotient subtorus identity component.

    Evaluates the one-parameter subgroups spanned by the kernel basis at
    half periods: the reachable sign vectors are the kernel columns mod 2.
    Agrees with deck_group exactly when torsion_rank is 0 (connected
    subtorus); both are computed and cross-checked, never assumed equal.
    """
    cols = [data.kernel_basis.column(j) for j in range(data.k)]
    basis = [tuple(x & 1 for x in col) for col in cols]
    return DeckGroup(_span_f2(basis, data.d))


def deck_groups_agree(data: DelzantData) -> bool:
    return deck_group(data).elements == deck_group_from_flow(data).elements


#: Previously tabulated deck action on the Y^{p,q} real link, by parity.
#: Key is (p mod 2, q mod 2); value is the sign vector of the nontrivial
#: element as printed in the literature. Compared against the computed
#: group in reports; disagreement is reported, not asserted.
YPQ_TABULATED_DECK_ACTION = {
    (0, 1): (0, 0, 0, 1),
    (1, 1): (0, 0, 1, 0),
    (1, 0): (0, 0, 1, 1),
}


def ypq_tabulated_deck_action(p: int, q: int) -> tuple[int, ...]:
    return YPQ_TABULATED_DECK_ACTION[(p % 2, q % 2)]


Scalar = Union[int, float, Fraction]


@dataclass(frozen=True)
class ReebCoefficients:
    """Minimum-norm coefficients b with normal_matrix @ b = xi.

    b is only defined up to the kernel of the normal matrix; the
    minimum-norm representative makes outputs reproducible. ``residual``
    is the sup-norm of normal_matrix @ b - xi (exactly zero for rational
    xi, which is solved over Q).
    """

    values: tuple[Scalar, ...]
    xi: tuple[Scalar, ...]
    residual: float

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


def reeb_coefficients(data: DelzantData, xi: Sequence[Scalar]) -> ReebCoefficients:
    """Solve normal_matrix @ b = xi for the minimum-norm b.

    The system is always consistent for validated cones (the normals span).
    Rational xi is solved exactly via the normal equations over Q; float xi
    falls back to numpy least squares.
    """
    if len(xi) != data.cone.dim:
        raise ValueError(f"xi must have length {data.cone.dim}")
    beta = data.normal_matrix
    if all(isinstance(x, Rational) for x in xi):
        gram = (beta @ beta.transpose()).data
        y = solve_rational(gram, [Fraction(x) for x in xi])
        if y is None:
            raise ValueError("inconsistent system; cone normals do not span")
        bt = beta.transpose()
        b = tuple(sum(Fraction(r) * yy for r, yy in zip(row, y)) for row in bt.data)
        xi_frac = tuple(Fraction(x) for x in xi)
        check = tuple(sum(Fraction(a) * v for a, v in zip(row, b)) for row in beta.data)
        residual = max(abs(float(c - t)) for c, t in zip(check, xi_frac))
        return ReebCoefficients(b, tuple(xi), residual)
    mat = np.array(beta.data, dtype=float)
    target = np.array([float(x) for x in xi])
    b, *_ = np.linalg.lstsq(mat, target, rcond=None)
    residual = float(np.max(np.abs(mat @ b - target)))
    return ReebCoefficients(tuple(float(v) for v in b), tuple(float(x) for x in xi), residual)
