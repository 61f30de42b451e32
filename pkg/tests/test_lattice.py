"""Exact linear algebra tests: normal forms, kernels, saturation."""

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selink.lattice import (
    DependentVectorsError,
    IntMatrix,
    hermite_normal_form,
    integer_kernel_basis,
    is_primitive,
    is_saturated,
    rational_rank,
    smith_normal_form,
    solve_rational,
)

Y21_BETA = IntMatrix.from_rows([[1, 1, 1, 1], [0, 0, 2, 1], [0, 1, 2, 0]])


def column_span_contains(m: IntMatrix, target, box=10):
    """Brute-force membership of target in the integer column span of m.

    Only valid when coefficients within [-box, box] suffice, which holds for
    the small fixtures used here.
    """
    cols = m.columns()
    cols = [c for c in cols if any(x != 0 for x in c)]
    if not cols:
        return all(x == 0 for x in target)
    for coeffs in itertools.product(range(-box, box + 1), repeat=len(cols)):
        if all(sum(k * c[i] for k, c in zip(coeffs, cols)) == t for i, t in enumerate(target)):
            return True
    return False


small_matrices = st.integers(min_value=1, max_value=4).flatmap(
    lambda r: st.integers(min_value=1, max_value=4).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(min_value=-9, max_value=9), min_size=c, max_size=c),
            min_size=r,
            max_size=r,
        )
    )
)


class TestHermite:
    def test_identity(self):
        m = IntMatrix.identity(3)
        assert hermite_normal_form(m) == m

    def test_zero(self):
        m = IntMatrix.zero(2, 3)
        assert hermite_normal_form(m) == m

    def test_span_preserved_2x2(self):
        m = IntMatrix.from_rows([[2, 4], [6, 8]])
        h = hermite_normal_form(m)
        # mutual membership of columns in each other's integer span
        for col in m.columns():
            assert column_span_contains(h, col)
        for col in h.columns():
            assert column_span_contains(m, col)

    @given(small_matrices)
    @settings(max_examples=60, deadline=None)
    def test_idempotent(self, rows):
        m = IntMatrix.from_rows(rows)
        h = hermite_normal_form(m)
        assert hermite_normal_form(h) == h


class TestSmith:
    def test_identity(self):
        snf = smith_normal_form(IntMatrix.identity(2))
        assert snf.diag == (1, 1)

    def test_2x2(self):
        # d1 = gcd of entries = 2, d1*d2 = |det| = |16 - 24| = 8, so (2, 4)
        snf = smith_normal_form(IntMatrix.from_rows([[2, 4], [6, 8]]))
        assert snf.diag == (2, 4)

    def test_diagonal_input(self):
        snf = smith_normal_form(IntMatrix.from_rows([[2, 0], [0, 2]]))
        assert snf.diag == (2, 2)

    @given(small_matrices)
    @settings(max_examples=100, deadline=None)
    def test_round_trip_and_chain(self, rows):
        m = IntMatrix.from_rows(rows)
        snf = smith_normal_form(m)
        prod = snf.left @ m @ snf.right
        for i in range(prod.rows):
            for j in range(prod.cols):
                expected = snf.diag[i] if i == j else 0
                assert prod.data[i][j] == expected
        for d in snf.diag:
            assert d >= 0
        for a, b in zip(snf.diag, snf.diag[1:]):
            if a != 0:
                assert b % a == 0
            else:
                assert b == 0

    @given(small_matrices)
    @settings(max_examples=60, deadline=None)
    def test_transforms_unimodular(self, rows):
        m = IntMatrix.from_rows(rows)
        snf = smith_normal_form(m)
        assert abs(_det(snf.left)) == 1
        assert abs(_det(snf.right)) == 1


def _det(m: IntMatrix) -> int:
    # Bareiss elimination, exact
    a = [list(r) for r in m.data]
    n = m.rows
    assert n == m.cols
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


class TestKernel:
    def test_y21(self):
        k = integer_kernel_basis(Y21_BETA)
        assert k.cols == 1
        v = k.column(0)
        assert v in ((-3, 2, -1, 2), (3, -2, 1, -2))
        assert all(x == 0 for x in Y21_BETA.mul_vec(v))

    def test_identity_has_no_kernel(self):
        k = integer_kernel_basis(IntMatrix.identity(3))
        assert k.cols == 0

    def test_antisymmetry(self):
        k = integer_kernel_basis(IntMatrix.from_rows([[1, 1]]))
        assert k.cols == 1
        assert k.column(0) in ((1, -1), (-1, 1))

    @given(small_matrices)
    @settings(max_examples=100, deadline=None)
    def test_kernel_annihilates_and_saturates(self, rows):
        m = IntMatrix.from_rows(rows)
        k = integer_kernel_basis(m)
        assert k.rows == m.cols
        if k.cols:
            assert (m @ k).is_zero()
            assert all(d == 1 for d in smith_normal_form(k).diag[: k.cols])
        assert k.cols == m.cols - rational_rank(m.data)


class TestPrimitive:
    @pytest.mark.parametrize("p,q", [(2, 1), (3, 1), (5, 4), (7, 2)])
    def test_ypq_second_normal(self, p, q):
        assert is_primitive((1, p - q - 1, p - q))

    def test_common_factor(self):
        assert not is_primitive((2, 4, 6))

    def test_unit(self):
        assert is_primitive((0, 0, 1))

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            is_primitive((0, 0, 0))


def saturation_oracle(vectors, ambient_dim, box=10):
    """Enumerate lattice points of the real span inside [-box, box]^dim and
    test each for integer-combination membership.

    Sound for rank <= 2 with entries in [-5, 5]: any violating coset
    representative can be reduced to one with sup-norm below 2 * 5.
    """
    cols = [[v[i] for v in vectors] for i in range(ambient_dim)]
    for point in itertools.product(range(-box, box + 1), repeat=ambient_dim):
        coeffs = solve_rational(cols, point)
        if coeffs is None:
            continue
        if not all(c.denominator == 1 for c in coeffs):
            return False
    return True


class TestSaturation:
    def test_single_unit(self):
        assert is_saturated([(1, 0, 0)], 3)

    def test_sublattice(self):
        # (1, 0) is in the real span but not the integer span
        assert not is_saturated([(2, 0), (0, 1)], 2)

    def test_dependent_rejected_with_witness(self):
        with pytest.raises(DependentVectorsError) as err:
            is_saturated([(1, 2), (2, 4)], 2)
        w = err.value.witness
        assert any(c != 0 for c in w)
        assert all(w[0] * 1 + w[1] * 2 == 0 for _ in [0])
        assert w[0] * Fraction(1) + w[1] * Fraction(2) == 0
        assert w[0] * Fraction(2) + w[1] * Fraction(4) == 0

    @given(
        st.lists(
            st.lists(st.integers(min_value=-5, max_value=5), min_size=3, max_size=3),
            min_size=1,
            max_size=2,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_oracle_agreement(self, vectors):
        vectors = [tuple(v) for v in vectors]
        if rational_rank(vectors) != len(vectors):
            return
        assert is_saturated(vectors, 3) == saturation_oracle(vectors, 3)

    def test_rank3_determinant_oracle(self):
        # full-rank saturation in Z^3 is |det| = 1; check both outcomes
        for rows, expect in [
            ([(1, 0, 0), (0, 1, 0), (1, 1, 1)], True),
            ([(1, 0, 0), (0, 2, 0), (0, 0, 1)], False),
            ([(2, 1, 0), (1, 1, 0), (3, 2, 1)], True),
        ]:
            det = _det(IntMatrix.from_rows(rows))
            assert (abs(det) == 1) == is_saturated(list(rows), 3)
