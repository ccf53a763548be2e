"""Classical observables: polynomials in the momenta with Expression coefficients."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import exactla
from .symexpr import DomainError, Expression, GaussianRational, join_terms

__all__ = [
    "PhasePolynomial",
    "PhasePoint",
    "poisson_bracket",
    "jacobian_rank",
    "eval_at",
    "parse_phase",
]


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float
    p1: float
    p2: float


class PhasePolynomial:
    """``sum c_kl(x, y) * p1**k * p2**l``; immutable and canonical."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Expression] | None = None):
        clean = {}
        for (k, l), c in (terms or {}).items():
            if k < 0 or l < 0:
                raise ValueError("momentum exponents must be nonnegative")
            c = Expression.coerce(c)
            if c:
                clean[(int(k), int(l))] = c
        self._terms = clean

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    @classmethod
    def function(cls, f) -> "PhasePolynomial":
        return cls({(0, 0): Expression.coerce(f)})

    @classmethod
    def momentum(cls, k: int, l: int, coeff=1) -> "PhasePolynomial":
        return cls({(k, l): Expression.coerce(coeff)})

    @classmethod
    def coerce(cls, value) -> "PhasePolynomial":
        if isinstance(value, PhasePolynomial):
            return value
        return cls.function(value)

    # access
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, k: int, l: int) -> Expression:
        return self._terms.get((k, l), Expression())

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((k + l for k, l in self._terms), default=-1)

    def homogeneous_part(self, d: int) -> "PhasePolynomial":
        return PhasePolynomial._raw({kl: c for kl, c in self._terms.items() if sum(kl) == d})

    def as_expression(self) -> Expression | None:
        """The coefficient if the polynomial has no momentum dependence."""
        if not self._terms:
            return Expression()
        if set(self._terms) == {(0, 0)}:
            return self._terms[(0, 0)]
        return None

    def is_classical_real(self) -> bool:
        return all(c.is_real() and c.max_power("hbar") == 0 for c in self._terms.values())

    # ring operations
    def __add__(self, other):
        other = PhasePolynomial.coerce(other)
        out = dict(self._terms)
        for kl, c in other._terms.items():
            s = out.get(kl)
            s = c if s is None else s + c
            if s:
                out[kl] = s
            else:
                out.pop(kl, None)
        return PhasePolynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return PhasePolynomial._raw({kl: -c for kl, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-PhasePolynomial.coerce(other))

    def __rsub__(self, other):
        return PhasePolynomial.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, PhasePolynomial):
            other = Expression.coerce(other)
            return PhasePolynomial._raw(
                {kl: c * other for kl, c in self._terms.items() if c * other})
        out: dict = {}
        for (k1, l1), c1 in self._terms.items():
            for (k2, l2), c2 in other._terms.items():
                kl = (k1 + k2, l1 + l2)
                out[kl] = out[kl] + c1 * c2 if kl in out else c1 * c2
        return PhasePolynomial._raw({kl: c for kl, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = PhasePolynomial.function(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, PhasePolynomial):
            try:
                other = PhasePolynomial.coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def map_coefficients(self, fn) -> "PhasePolynomial":
        return PhasePolynomial({kl: fn(c) for kl, c in self._terms.items()})

    def substitute_hbar_zero(self) -> "PhasePolynomial":
        return self.map_coefficients(Expression.substitute_hbar_zero)

    # calculus
    def diff(self, var: str) -> "PhasePolynomial":
        if var in ("x", "y"):
            return PhasePolynomial._raw(
                {kl: d for kl, c in self._terms.items() if (d := c.diff(var))})
        if var == "p1":
            return PhasePolynomial._raw(
                {(k - 1, l): c * k for (k, l), c in self._terms.items() if k})
        if var == "p2":
            return PhasePolynomial._raw(
                {(k, l - 1): c * l for (k, l), c in self._terms.items() if l})
        raise ValueError(f"unknown phase-space variable {var!r}")

    def gradient(self) -> list["PhasePolynomial"]:
        return [self.diff(v) for v in ("x", "y", "p1", "p2")]

    # evaluation
    def evaluate(self, at: PhasePoint, alpha: float = 1.0, hbar: float = 0.0):
        total = 0j
        for (k, l), c in self._terms.items():
            total += c.evaluate(at.x, at.y, alpha, hbar) * at.p1 ** k * at.p2 ** l
        return total.real if total.imag == 0 else total

    def evaluate_exact(self, at: PhasePoint, alpha=1, hbar=0) -> GaussianRational:
        total = GaussianRational(0)
        p1, p2 = Fraction(at.p1), Fraction(at.p2)
        for (k, l), c in self._terms.items():
            total = total + c.evaluate_exact(at.x, at.y, alpha, hbar) * (p1 ** k * p2 ** l)
        return total

    # printing
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (k, l) in sorted(self._terms, key=lambda kl: (-(kl[0] + kl[1]), -kl[0])):
            c = self._terms[(k, l)]
            mom = "*".join(f for f in (_pow("p1", k), _pow("p2", l)) if f)
            if not mom:
                parts.append(f"({c})" if len(c) > 1 else str(c))
            elif c == 1 or c == -1:
                parts.append(mom if c == 1 else f"-{mom}")
            else:
                parts.append(f"({c})*{mom}")
        return join_terms(parts)

    def __repr__(self):
        return f"PhasePolynomial({str(self)!r})"


def _pow(name: str, e: int) -> str:
    if e == 0:
        return ""
    return name if e == 1 else f"{name}^{e}"


P1 = PhasePolynomial.momentum(1, 0)
P2 = PhasePolynomial.momentum(0, 1)


def poisson_bracket(a: PhasePolynomial, b: PhasePolynomial) -> PhasePolynomial:
    """``{a, b} = a_x b_p1 - a_p1 b_x + a_y b_p2 - a_p2 b_y``, so ``{x, p1} = +1``."""
    return (a.diff("x") * b.diff("p1") - a.diff("p1") * b.diff("x")
            + a.diff("y") * b.diff("p2") - a.diff("p2") * b.diff("y"))


def eval_at(a: PhasePolynomial, at: PhasePoint, alpha: float, hbar: float = 0.0):
    return a.evaluate(at, alpha, hbar)


def jacobian_matrix(fns: Sequence[PhasePolynomial], at: PhasePoint, alpha=1, hbar=0):
    """Exact Jacobian with respect to (x, y, p1, p2) at a rational point."""
    rows = []
    for f in fns:
        row = []
        for g in f.gradient():
            v = g.evaluate_exact(at, alpha, hbar)
            if v.im:
                raise DomainError("Jacobian entry is not real; expected a classical observable")
            row.append(v.re)
        rows.append(row)
    return rows


def jacobian_rank(fns: Iterable[PhasePolynomial], at: PhasePoint, alpha=1) -> int:
    """Exact rank of the Jacobian; choose ``x`` so every fractional power is rational."""
    fns = list(fns)
    if Fraction(at.x) <= 0:
        raise DomainError("Jacobian probe point must have x > 0")
    return exactla.rank(jacobian_matrix(fns, at, alpha), 4)


def _phase_ring():
    from .parsing import Ring

    atoms = {n: PhasePolynomial.function(Expression.var(n)) for n in ("x", "y", "alpha", "hbar", "i")}
    atoms["p1"] = P1
    atoms["p2"] = P2
    return Ring(atoms=atoms, lift=PhasePolynomial.function,
                lower=lambda v: v.as_expression(), name="phase polynomial")


def parse_phase(text: str) -> PhasePolynomial:
    """Parse a phase-space polynomial; the expression grammar plus ``p1``, ``p2``."""
    from .parsing import Parser

    return Parser(text, _phase_ring()).parse()
