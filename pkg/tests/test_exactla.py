from fractions import Fraction

import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from superint import exactla

matrices = st.integers(1, 6).flatmap(lambda n: st.lists(
    st.lists(st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3)), min_size=n, max_size=n),
    min_size=0, max_size=6).map(lambda rows: (rows, n)))


def _sympy_nullspace(rows, n):
    if not rows:
        return sp.eye(n).columnspace()
    return sp.Matrix(rows).nullspace()


@given(matrices)
def test_rank_matches_sympy(m):
    rows, n = m
    expected = sp.Matrix(rows).rank() if rows else 0
    assert exactla.rank(rows, n) == expected


@given(matrices)
def test_nullspace_matches_sympy(m):
    rows, n = m
    basis = exactla.nullspace(rows, n)
    assert len(basis) == len(_sympy_nullspace(rows, n))
    for v in basis:
        assert all(sum(r[j] * v[j] for j in range(n)) == 0 for r in rows)
        assert all(x.denominator == 1 for x in v)
    if basis:
        assert exactla.rank(basis) == len(basis)


@given(matrices)
def test_sparse_nullspace_spans_same_space(m):
    rows, n = m
    dense = exactla.nullspace(rows, n)
    sparse = exactla.sparse_nullspace([dict(enumerate(r)) for r in rows], n)
    assert len(dense) == len(sparse)
    for v in sparse:
        assert exactla.in_span(v, dense)


@given(matrices)
def test_row_space_basis_is_canonical(m):
    rows, n = m
    if not rows:
        return
    a = exactla.row_space_basis(rows)
    b = exactla.row_space_basis(list(reversed(rows)) + [[2 * v for v in rows[0]]])
    assert a == b
    assert len(a) == sp.Matrix(rows).rank()


def test_in_span():
    basis = [[1, 0, 1], [0, 1, 1]]
    assert exactla.in_span([2, 3, 5], basis)
    assert not exactla.in_span([0, 0, 1], basis)
    assert exactla.in_span([0, 0, 0], [])


def test_bareiss_keeps_integers_exact():
    rows = [[Fraction(1, 3), Fraction(2, 7)], [Fraction(5, 3), Fraction(10, 7)]]
    assert exactla.rank(rows) == 1
    ech, piv = exactla.echelon(rows)
    assert piv == [0] and all(isinstance(v, int) for v in ech[0])
