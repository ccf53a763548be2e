"""Quantum observables as normal-ordered differential operators.

A :class:`WeylOperator` stores ``sum c_ab(x, y) * dx**a * dy**b`` with every
derivative to the right.  Momenta enter only through constructors,
``p1 = -i*hbar*dx`` and ``p2 = -i*hbar*dy``; the factors of ``i`` and ``hbar``
live in the coefficients.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Mapping

import numpy as np

from .phasepoly import PhasePolynomial
from .symexpr import HBAR, I, Expression, ExpressionError, join_terms

__all__ = [
    "WeylOperator",
    "compose",
    "commutator",
    "anticommutator",
    "symmetrize",
    "adjoint",
    "self_adjoint_part",
    "skew_adjoint_part",
    "parity_components",
    "classical_limit",
    "apply_on_grid",
    "parse_operator",
    "P1",
    "P2",
]


class WeylOperator:
    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Expression] | None = None):
        clean = {}
        for (a, b), c in (terms or {}).items():
            if a < 0 or b < 0:
                raise ValueError("derivative orders must be nonnegative")
            c = Expression.coerce(c)
            if c:
                clean[(int(a), int(b))] = c
        self._terms = clean

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    # constructors
    @classmethod
    def function(cls, f) -> "WeylOperator":
        """Multiplication by ``f``."""
        return cls({(0, 0): Expression.coerce(f)})

    @classmethod
    def identity(cls) -> "WeylOperator":
        return cls.function(1)

    @classmethod
    def derivative(cls, a: int, b: int, coeff=1) -> "WeylOperator":
        return cls({(a, b): Expression.coerce(coeff)})

    @classmethod
    def momentum(cls, k: int, l: int) -> "WeylOperator":
        """``p1**k p2**l = (-i hbar)**(k+l) dx**k dy**l``."""
        return cls({(k, l): (-I * HBAR) ** (k + l)})

    @classmethod
    def coerce(cls, value) -> "WeylOperator":
        if isinstance(value, WeylOperator):
            return value
        return cls.function(value)

    # access
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, a: int, b: int) -> Expression:
        return self._terms.get((a, b), Expression())

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def order(self) -> int:
        return max((a + b for a, b in self._terms), default=-1)

    def as_expression(self) -> Expression | None:
        if not self._terms:
            return Expression()
        if set(self._terms) == {(0, 0)}:
            return self._terms[(0, 0)]
        return None

    def is_identity_multiple(self) -> bool:
        """True for ``c * 1`` with ``c`` free of x and y."""
        e = self.as_expression()
        return e is not None and e.is_constant()

    # algebra
    def __add__(self, other):
        other = WeylOperator.coerce(other)
        out = dict(self._terms)
        for ab, c in other._terms.items():
            s = out.get(ab)
            s = c if s is None else s + c
            if s:
                out[ab] = s
            else:
                out.pop(ab, None)
        return WeylOperator._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return WeylOperator._raw({ab: -c for ab, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-WeylOperator.coerce(other))

    def __rsub__(self, other):
        return WeylOperator.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, WeylOperator):
            return compose(self, other)
        other = Expression.coerce(other)
        if other.is_constant():
            return WeylOperator._raw({ab: p for ab, c in self._terms.items() if (p := c * other)})
        return compose(self, WeylOperator.function(other))

    def __rmul__(self, other):
        return compose(WeylOperator.coerce(other), self)

    def __pow__(self, n: int):
        result = WeylOperator.identity()
        for _ in range(n):
            result = compose(result, self)
        return result

    def __eq__(self, other):
        if not isinstance(other, WeylOperator):
            try:
                other = WeylOperator.coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def map_coefficients(self, fn) -> "WeylOperator":
        return WeylOperator({ab: fn(c) for ab, c in self._terms.items()})

    def substitute_hbar_zero(self) -> "WeylOperator":
        return self.map_coefficients(Expression.substitute_hbar_zero)

    # printing
    def __str__(self):
        return self.normal_ordered_str()

    def normal_ordered_str(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (a, b) in sorted(self._terms, key=lambda ab: (-(ab[0] + ab[1]), -ab[0])):
            c = self._terms[(a, b)]
            d = "*".join(f for f in (_pow("dx", a), _pow("dy", b)) if f)
            cs = f"({c})" if len(c) > 1 else str(c)
            if not d:
                parts.append(cs)
            elif c == 1 or c == -1:
                parts.append(d if c == 1 else f"-{d}")
            else:
                parts.append(f"{cs}*{d}")
        return join_terms(parts)

    def symmetric_str(self) -> str:
        """Print as ``sum {g/2, p1^k p2^l}`` plus a function; parseable by :func:`parse_operator`."""
        parts = []
        for (a, b), c in symmetric_parts(self).items():
            m = a + b
            if m == 0:
                parts.append(_paren(c))
                continue
            try:
                # dx^a dy^b = (i/hbar)^m p1^a p2^b
                g = c * (I ** m) / (HBAR ** m)
            except ExpressionError:
                return self.normal_ordered_str()
            mom = "*".join(f for f in (_pow("p1", a), _pow("p2", b)) if f)
            if g.is_constant():
                parts.append(mom if g == 1 else f"{_paren(g)}*{mom}")
            else:
                parts.append(f"{{{g * Fraction(1, 2)}, {mom}}}")
        return join_terms(parts)

    def __repr__(self):
        return f"WeylOperator({str(self)!r})"


def _pow(name: str, e: int) -> str:
    if e == 0:
        return ""
    return name if e == 1 else f"{name}^{e}"


def _paren(e: Expression) -> str:
    return f"({e})" if len(e) > 1 else str(e)


P1 = WeylOperator.momentum(1, 0)
P2 = WeylOperator.momentum(0, 1)


@lru_cache(maxsize=None)
def _derivatives(c: Expression, a: int, b: int) -> Expression:
    if a:
        return _derivatives(c, a - 1, b).diff("x")
    if b:
        return _derivatives(c, 0, b - 1).diff("y")
    return c


def compose(A: WeylOperator, B: WeylOperator) -> WeylOperator:
    """Normal-ordered product via ``dx^a . f = sum_k C(a,k) f^(k) dx^(a-k)``."""
    out: dict = {}
    for (a1, b1), c1 in A._terms.items():
        for (a2, b2), c2 in B._terms.items():
            for i in range(a1 + 1):
                ci = comb(a1, i)
                for j in range(b1 + 1):
                    d = _derivatives(c2, i, j)
                    if not d:
                        continue
                    term = c1 * d
                    w = ci * comb(b1, j)
                    if w != 1:
                        term = term * w
                    key = (a1 - i + a2, b1 - j + b2)
                    s = out.get(key)
                    out[key] = term if s is None else s + term
    return WeylOperator._raw({k: c for k, c in out.items() if c})


def commutator(A: WeylOperator, B: WeylOperator) -> WeylOperator:
    return compose(A, B) - compose(B, A)


def anticommutator(A: WeylOperator, B: WeylOperator) -> WeylOperator:
    return compose(A, B) + compose(B, A)


def symmetrize(f, k: int, l: int) -> WeylOperator:
    """``(f p1^k p2^l + p1^k p2^l f) / 2`` in normal order."""
    F = WeylOperator.function(f)
    P = WeylOperator.momentum(k, l)
    return anticommutator(F, P) * Fraction(1, 2)


def adjoint(A: WeylOperator) -> WeylOperator:
    """Formal adjoint (flat measure, no boundary terms): ``(c dx^a dy^b)^+ = (-1)^(a+b) dx^a dy^b . conj(c)``."""
    out = WeylOperator()
    for (a, b), c in A._terms.items():
        sign = -1 if (a + b) % 2 else 1
        out = out + compose(WeylOperator.derivative(a, b, sign), WeylOperator.function(c.conjugate()))
    return out


def self_adjoint_part(A: WeylOperator) -> WeylOperator:
    return (A + adjoint(A)) * Fraction(1, 2)


def skew_adjoint_part(A: WeylOperator) -> WeylOperator:
    return (A - adjoint(A)) * Fraction(1, 2)


def _half_anticommutator(c: Expression, a: int, b: int) -> WeylOperator:
    D = WeylOperator.derivative(a, b)
    return (compose(WeylOperator.function(c), D) + compose(D, WeylOperator.function(c))) * Fraction(1, 2)


def symmetric_parts(A: WeylOperator) -> dict[tuple[int, int], Expression]:
    """Coefficients ``c_ab`` with ``A = sum (1/2){c_ab, dx^a dy^b}``, highest order first.

    The decomposition is unique: each half-anticommutator has leading term
    ``c_ab dx^a dy^b`` and otherwise only lower orders.
    """
    rest = A
    out: dict[tuple[int, int], Expression] = {}
    while not rest.is_zero():
        m = rest.order()
        for ab in sorted((ab for ab in rest._terms if sum(ab) == m), key=lambda ab: -ab[0]):
            c = rest._terms[ab]
            out[ab] = c
            rest = rest - _half_anticommutator(c, *ab)
    return out


def parity_components(A: WeylOperator) -> tuple[WeylOperator, WeylOperator]:
    """``(even, odd)`` parts by momentum degree in the symmetrized basis.

    Splitting the normal-ordered form directly would misplace ordering terms
    such as the ``-(i hbar/2) g_x`` inside ``(1/2){g, p1}``.
    """
    even, odd = WeylOperator(), WeylOperator()
    for (a, b), c in symmetric_parts(A).items():
        piece = _half_anticommutator(c, a, b)
        if (a + b) % 2:
            odd = odd + piece
        else:
            even = even + piece
    return even, odd


def classical_limit(A: WeylOperator) -> PhasePolynomial:
    """Rewrite ``d`` as ``(i/hbar) p`` and set hbar to zero.

    Raises ``ExpressionError`` if a negative power of hbar would survive.
    """
    out = {}
    for (a, b), c in A._terms.items():
        m = a + b
        if c.min_power("hbar") < m:
            raise ExpressionError(
                f"term of order {m} has too few powers of hbar for a classical limit")
        g = (c * I ** m / HBAR ** m).substitute_hbar_zero()
        if g:
            out[(a, b)] = g
    return PhasePolynomial(out)


def quantize_symmetric(f: PhasePolynomial) -> WeylOperator:
    """``sum c_kl p^k`` to ``sum (1/2){c_kl, p^k}``."""
    out = WeylOperator()
    for (k, l), c in f.items():
        out = out + symmetrize(c, k, l)
    return out


# -- numerical application on grids --------------------------------------------

@lru_cache(maxsize=None)
def central_weights(order: int, half_width: int) -> tuple[Fraction, ...]:
    """Exact central finite-difference weights on ``2*half_width+1`` nodes."""
    n = 2 * half_width + 1
    offsets = list(range(-half_width, half_width + 1))
    # moment conditions: sum w_j s_j^m = m! * [m == order]
    rows = [[Fraction(s) ** m for s in offsets] + [Fraction(0)] for m in range(n)]
    fact = 1
    for k in range(2, order + 1):
        fact *= k
    rows[order][-1] = Fraction(fact)
    # Gauss-Jordan on a small Vandermonde system
    for c in range(n):
        p = next(r for r in range(c, n) if rows[r][c] != 0)
        rows[c], rows[p] = rows[p], rows[c]
        piv = rows[c][c]
        rows[c] = [v / piv for v in rows[c]]
        for r in range(n):
            if r != c and rows[r][c]:
                f = rows[r][c]
                rows[r] = [v - f * w for v, w in zip(rows[r], rows[c])]
    return tuple(row[-1] for row in rows)


def stencil_half_width(order: int) -> int:
    """Half-width giving a fourth-order accurate central stencil."""
    if order == 0:
        return 0
    return 2 if order <= 2 else 3


def _diff_axis(f: np.ndarray, order: int, h: float, axis: int) -> np.ndarray:
    if order == 0:
        return f
    w = stencil_half_width(order)
    weights = [float(v) for v in central_weights(order, w)]
    out = np.full_like(f, np.nan)
    n = f.shape[axis]
    if n <= 2 * w:
        raise ValueError(f"grid too small for a {2 * w + 1}-point stencil")
    acc = np.zeros_like(np.take(f, range(w, n - w), axis=axis))
    for j, wt in enumerate(weights):
        if wt:
            acc = acc + wt * np.take(f, range(j, n - 2 * w + j), axis=axis)
    idx = [slice(None)] * f.ndim
    idx[axis] = slice(w, n - w)
    out[tuple(idx)] = acc / h ** order
    return out


def apply_on_grid(A: WeylOperator, psi: np.ndarray, x: np.ndarray, y: np.ndarray,
                  alpha: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """Apply ``A`` to samples ``psi[ix, iy]`` on the tensor grid ``x`` by ``y``.

    Derivatives use fourth-order central stencils; nodes whose stencil leaves
    the grid are returned as NaN, so nested applications shrink the valid
    interior automatically.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (x.size, y.size):
        raise ValueError("psi must have shape (len(x), len(y))")
    if x.size < 2 or y.size < 2:
        raise ValueError("grid too small for a stencil")
    hx, hy = x[1] - x[0], y[1] - y[0]
    XX, YY = np.meshgrid(x, y, indexing="ij")
    out = np.zeros_like(psi)
    for (a, b), c in A.items():
        d = _diff_axis(_diff_axis(psi, a, hx, 0), b, hy, 1)
        out = out + c.evaluate_array(XX, YY, alpha, hbar) * d
    return out


def interior_norm(f: np.ndarray, hx: float = 1.0, hy: float = 1.0, mask=None) -> float:
    """Discrete L2 norm over finite entries (or over ``mask``)."""
    if mask is None:
        mask = np.isfinite(f)
    return float(np.sqrt(np.sum(np.abs(f[mask]) ** 2) * hx * hy))


# -- parsing -------------------------------------------------------------------

def _operator_ring():
    from .parsing import Ring

    atoms = {n: WeylOperator.function(Expression.var(n)) for n in ("x", "y", "alpha", "hbar", "i")}
    atoms["p1"] = P1
    atoms["p2"] = P2
    atoms["dx"] = WeylOperator.derivative(1, 0)
    atoms["dy"] = WeylOperator.derivative(0, 1)
    return Ring(atoms=atoms, lift=WeylOperator.function, lower=lambda v: v.as_expression(),
                anticommutator=anticommutator, name="operator")


def parse_operator(text: str) -> WeylOperator:
    """Parse an operator; products compose left to right and ``{A, B}`` is ``AB + BA``."""
    from .parsing import Parser

    return Parser(text, _operator_ring()).parse()
