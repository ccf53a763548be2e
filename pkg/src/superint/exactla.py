"""Exact linear algebra over the rationals.

Elimination is fraction-free (Bareiss): rows are scaled to integers once and
every intermediate entry stays an integer.  Only the final back substitution
for null-space vectors produces fractions, which are then cleared again.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for row in rows:
        fr = [Fraction(v) for v in row]
        den = lcm(*(v.denominator for v in fr)) if fr else 1
        out.append([int(v * den) for v in fr])
    return out


def echelon(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form.

    Returns the integer echelon matrix (zero rows dropped) and the list of
    pivot columns.
    """
    m = _integer_rows(rows)
    if ncols is None:
        ncols = len(m[0]) if m else 0
    for row in m:
        if len(row) != ncols:
            raise ValueError("ragged matrix")
    pivots: list[int] = []
    r = 0
    prev = 1
    nrows = len(m)
    for c in range(ncols):
        if r >= nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for i in range(r + 1, nrows):
            mic = m[i][c]
            row_i, row_r = m[i], m[r]
            for j in range(c, ncols):
                # Bareiss step: exact division by the previous pivot
                row_i[j] = (piv * row_i[j] - mic * row_r[j]) // prev
        prev = piv
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    if not rows:
        return 0
    return len(echelon(rows, ncols)[1])


def _primitive(vec: list[Fraction]) -> list[Fraction]:
    den = lcm(*(v.denominator for v in vec))
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, v)
    g = g or 1
    first = next((v for v in ints if v), 1)
    if first < 0:
        g = -g
    return [Fraction(v, g) for v in ints]


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of ``{v : rows @ v = 0}``, one primitive integer vector per free column.

    The basis is canonical: each vector has a 1-pattern on the free columns
    (up to the primitive rescaling), so equal null spaces give equal output.
    """
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    ech, pivots = echelon(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            pc = pivots[r]
            row = ech[r]
            s = sum((row[j] * v[j] for j in range(pc + 1, ncols) if row[j]), Fraction(0))
            v[pc] = -s / row[pc]
        basis.append(_primitive(v))
    return basis


def in_span(vec: Sequence, basis: Sequence[Sequence]) -> bool:
    """Whether ``vec`` is a rational combination of ``basis``."""
    if not any(Fraction(v) for v in vec):
        return True
    if not basis:
        return False
    return rank(list(basis) + [list(vec)]) == rank(list(basis))


def sparse_rref(rows: Sequence[dict], ncols: int) -> tuple[dict[int, dict], list[int]]:
    """Reduced row echelon form of sparse rational rows (``{col: value}``).

    Returns ``{pivot_col: row}`` with each row normalised to 1 at its pivot,
    plus the sorted pivot list.
    """
    pivot_rows: dict[int, dict] = {}
    for raw in rows:
        row = {c: Fraction(v) for c, v in raw.items() if v}
        # pivot rows are fully reduced, so one pass clears every pivot column
        for pc in [c for c in row if c in pivot_rows]:
            f = row[pc]
            for c, v in pivot_rows[pc].items():
                nv = row.get(c, 0) - f * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
        if not row:
            continue
        pc = min(row)
        inv = 1 / row[pc]
        row = {c: v * inv for c, v in row.items()}
        for other in pivot_rows.values():
            f = other.get(pc)
            if f:
                for c, v in row.items():
                    nv = other.get(c, 0) - f * v
                    if nv:
                        other[c] = nv
                    else:
                        other.pop(c, None)
        pivot_rows[pc] = row
    return pivot_rows, sorted(pivot_rows)


def sparse_nullspace(rows: Sequence[dict], ncols: int) -> list[list[Fraction]]:
    pivot_rows, pivots = sparse_rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for pc, row in pivot_rows.items():
            coef = row.get(f)
            if coef:
                v[pc] = -coef
        basis.append(_primitive(v))
    return basis


def row_space_basis(vectors: Sequence[Sequence]) -> list[list[Fraction]]:
    """Canonical (reduced echelon, primitive) basis of the span of ``vectors``."""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return []
    ncols = len(vectors[0])
    pivot_rows, pivots = sparse_rref([dict(enumerate(v)) for v in vectors], ncols)
    out = []
    for pc in pivots:
        row = pivot_rows[pc]
        out.append(_primitive([row.get(c, Fraction(0)) for c in range(ncols)]))
    return out
