"""Exact expressions over the monomial ring in x, y, alpha and hbar.

An :class:`Expression` is a finite sum ``c * x**r * y**s * alpha**a * hbar**h``
with Gaussian-rational ``c``, rational ``r, s`` and nonnegative integer
``a, h``.  Every instance is kept in canonical form (no zero coefficients), so
structural equality is mathematical equality.

    >>> e = parse("alpha*y*x^(-2/3) - 5/72*hbar^2*x^(-2)")
    >>> len(e)
    2
    >>> e.diff("y")
    Expression('x^(-2/3)*alpha')
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Union

import numpy as np

Rational = Fraction
Number = Union[int, Fraction, "GaussianRational"]


class ExpressionError(ValueError):
    """Base class for errors raised by the expression kernel."""


class DomainError(ExpressionError):
    """Numeric evaluation outside the real domain of the expression."""


class ParseError(ExpressionError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value, 0)
        raise TypeError(f"cannot convert {value!r} to GaussianRational")

    def __add__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        if type(other) is GaussianRational:
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b and not d:
                return GaussianRational(a * c, 0)
            return GaussianRational(a * c - b * d, a * d + b * c)
        other = Fraction(other)
        return GaussianRational(self.re * other, self.im * other)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        n = other.norm()
        if not n:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * other.conjugate() * (1 / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("Gaussian rationals only support integer powers")
        if n < 0:
            return GaussianRational(1) / (self ** -n)
        result, base = GaussianRational(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return not self.im

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i" if self.im != 1 else "i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        im = "i" if mag == 1 else f"{mag}*i"
        return f"({self.re}{sign}{im})"


ZERO_C = GaussianRational(0)
ONE_C = GaussianRational(1)
I_C = GaussianRational(0, 1)


class MonomialKey(NamedTuple):
    """Exponents of ``x, y, alpha, hbar``; tuple order is the print order."""

    x: Fraction
    y: Fraction
    alpha: int
    hbar: int

    def mul(self, other: "MonomialKey") -> "MonomialKey":
        return MonomialKey(self.x + other.x, self.y + other.y,
                           self.alpha + other.alpha, self.hbar + other.hbar)


UNIT_KEY = MonomialKey(Fraction(0), Fraction(0), 0, 0)
_VARS = ("x", "y", "alpha", "hbar")


def _fmt_exp(name: str, e) -> str:
    if e == 1:
        return name
    if isinstance(e, Fraction) and e.denominator != 1:
        return f"{name}^({e.numerator}/{e.denominator})"
    e = int(e)
    return f"{name}^{e}" if e > 0 else f"{name}^({e})"


def _exact_root(q: Fraction, n: int) -> Fraction | None:
    """Exact positive ``n``-th root of a positive rational, or None."""
    if q <= 0:
        return None

    def iroot(m: int) -> int | None:
        r = round(m ** (1.0 / n))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** n == m:
                return cand
        return None

    num, den = iroot(q.numerator), iroot(q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


class Expression:
    """Canonical sum of monomials; immutable."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[MonomialKey, Number] | None = None):
        clean = {}
        if terms:
            for k, c in terms.items():
                c = GaussianRational.coerce(c)
                if c:
                    if not isinstance(k, MonomialKey):
                        k = MonomialKey(Fraction(k[0]), Fraction(k[1]), int(k[2]), int(k[3]))
                    if k.alpha < 0 or k.hbar < 0:
                        raise ExpressionError("alpha and hbar powers must be nonnegative")
                    clean[k] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Expression":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # constructors -----------------------------------------------------------
    @classmethod
    def const(cls, c: Number) -> "Expression":
        return cls({UNIT_KEY: c})

    @classmethod
    def monomial(cls, c: Number = 1, x=0, y=0, alpha: int = 0, hbar: int = 0) -> "Expression":
        return cls({MonomialKey(Fraction(x), Fraction(y), alpha, hbar): c})

    @classmethod
    def var(cls, name: str) -> "Expression":
        if name == "i":
            return cls.const(I_C)
        idx = _VARS.index(name)
        exps = [0, 0, 0, 0]
        exps[idx] = 1
        return cls.monomial(1, *exps)

    @classmethod
    def coerce(cls, value) -> "Expression":
        if isinstance(value, Expression):
            return value
        return cls.const(value)

    # mapping-like access ----------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        """True when free of x and y (alpha, hbar and i are constants)."""
        return all(not k.x and not k.y for k in self._terms)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def coefficient(self, key: MonomialKey) -> GaussianRational:
        return self._terms.get(key, ZERO_C)

    # ring operations --------------------------------------------------------
    def __add__(self, other):
        other = Expression.coerce(other)
        if not other._terms:
            return self
        out = dict(self._terms)
        for k, c in other._terms.items():
            s = out.get(k)
            if s is None:
                out[k] = c
            else:
                s = s + c
                if s:
                    out[k] = s
                else:
                    del out[k]
        return Expression._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Expression._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-Expression.coerce(other))

    def __rsub__(self, other):
        return Expression.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Expression):
            c = GaussianRational.coerce(other)
            if not c:
                return Expression._raw({})
            return Expression._raw({k: v * c for k, v in self._terms.items()})
        out: dict = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = MonomialKey(k1.x + k2.x, k1.y + k2.y, k1.alpha + k2.alpha, k1.hbar + k2.hbar)
                c = c1 * c2
                s = out.get(k)
                out[k] = c if s is None else s + c
        return Expression._raw({k: c for k, c in out.items() if c})

    __rmul__ = __mul__

    def inverse(self) -> "Expression":
        """Reciprocal of a monomial; alpha and hbar may not appear."""
        if not self._terms:
            raise ExpressionError("division by zero")
        if len(self._terms) != 1:
            raise ExpressionError("division is only defined by a single-term expression")
        (k, c), = self._terms.items()
        if k.alpha or k.hbar:
            raise ExpressionError("cannot divide by alpha or hbar (powers must stay nonnegative)")
        return Expression._raw({MonomialKey(-k.x, -k.y, 0, 0): ONE_C / c})

    def __truediv__(self, other):
        if not isinstance(other, Expression):
            c = GaussianRational.coerce(other)
            if not c:
                raise ZeroDivisionError("division by zero")
            return self * (ONE_C / c)
        if not other._terms:
            raise ZeroDivisionError("division by zero expression")
        if len(other._terms) == 1:
            (k, c), = other._terms.items()
            out = {}
            for k1, c1 in self._terms.items():
                nk = MonomialKey(k1.x - k.x, k1.y - k.y, k1.alpha - k.alpha, k1.hbar - k.hbar)
                if nk.alpha < 0 or nk.hbar < 0:
                    raise ExpressionError("quotient has a negative alpha or hbar power")
                out[nk] = c1 / c
            return Expression._raw(out)
        return self * other.inverse()

    def __pow__(self, n):
        n = Fraction(n)
        if n.denominator == 1:
            n = int(n)
            if n < 0:
                return self.inverse() ** (-n)
            result, base = Expression.const(1), self
            while n:
                if n & 1:
                    result = result * base
                base = base * base
                n >>= 1
            return result
        if len(self._terms) != 1:
            raise ExpressionError("fractional powers need a single-term base")
        (k, c), = self._terms.items()
        a, h = k.alpha * n, k.hbar * n
        if a.denominator != 1 or h.denominator != 1 or a < 0 or h < 0:
            raise ExpressionError("fractional power leaves alpha/hbar with a non-integer exponent")
        if c.im:
            raise ExpressionError("fractional power of a complex coefficient")
        root = _exact_root(abs(c.re), n.denominator) if c.re > 0 else None
        if root is None:
            raise ExpressionError(f"coefficient {c} has no exact rational power {n}")
        coef = root ** n.numerator
        return Expression._raw({MonomialKey(k.x * n, k.y * n, int(a), int(h)): GaussianRational(coef)})

    # calculus and maps ------------------------------------------------------
    def diff(self, var: str) -> "Expression":
        if var == "x":
            idx = 0
        elif var == "y":
            idx = 1
        else:
            raise ExpressionError(f"can only differentiate in x or y, not {var!r}")
        out = {}
        for k, c in self._terms.items():
            e = k[idx]
            if not e:
                continue
            nk = MonomialKey(k.x - 1, k.y, k.alpha, k.hbar) if idx == 0 else \
                MonomialKey(k.x, k.y - 1, k.alpha, k.hbar)
            out[nk] = c * e
        return Expression._raw(out)

    def diff_n(self, nx: int = 0, ny: int = 0) -> "Expression":
        e = self
        for _ in range(nx):
            e = e.diff("x")
        for _ in range(ny):
            e = e.diff("y")
        return e

    def conjugate(self) -> "Expression":
        return Expression._raw({k: c.conjugate() for k, c in self._terms.items()})

    def real_part(self) -> "Expression":
        return Expression({k: c.re for k, c in self._terms.items()})

    def imag_part(self) -> "Expression":
        return Expression({k: c.im for k, c in self._terms.items()})

    def is_real(self) -> bool:
        return all(not c.im for c in self._terms.values())

    def substitute_hbar_zero(self) -> "Expression":
        return Expression._raw({k: c for k, c in self._terms.items() if k.hbar == 0})

    def substitute(self, alpha=None, hbar=None) -> "Expression":
        """Replace alpha and/or hbar by rational numbers."""
        out = Expression()
        for k, c in self._terms.items():
            factor = Fraction(1)
            a, h = k.alpha, k.hbar
            if alpha is not None:
                factor *= Fraction(alpha) ** a
                a = 0
            if hbar is not None:
                factor *= Fraction(hbar) ** h
                h = 0
            out = out + Expression({MonomialKey(k.x, k.y, a, h): c * factor})
        return out

    def max_power(self, var: str) -> int:
        idx = _VARS.index(var)
        return max((k[idx] for k in self._terms), default=0)

    def min_power(self, var: str):
        idx = _VARS.index(var)
        return min((k[idx] for k in self._terms), default=0)

    # evaluation -------------------------------------------------------------
    def _check_domain(self, x, y):
        for k in self._terms:
            for val, e, name in ((x, k.x, "x"), (y, k.y, "y")):
                if e.denominator != 1 and val <= 0:
                    raise DomainError(f"{name}^({e}) needs {name} > 0, got {val}")
                if e < 0 and val == 0:
                    raise DomainError(f"{name}^({e}) is singular at {name} = 0")

    def evaluate(self, x: float, y: float, alpha: float = 1.0, hbar: float = 0.0) -> complex:
        """Floating-point value at a point; fractional powers need a positive base."""
        self._check_domain(x, y)
        total = 0j
        for k, c in self._terms.items():
            v = complex(c)
            if k.x:
                v *= x ** float(k.x) if k.x.denominator != 1 else x ** int(k.x)
            if k.y:
                v *= y ** float(k.y) if k.y.denominator != 1 else y ** int(k.y)
            if k.alpha:
                v *= alpha ** k.alpha
            if k.hbar:
                v *= hbar ** k.hbar
            total += v
        return total

    def evaluate_array(self, x: np.ndarray, y: np.ndarray, alpha: float = 1.0,
                       hbar: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        for k in self._terms:
            for arr, e, name in ((x, k.x, "x"), (y, k.y, "y")):
                if e.denominator != 1 and np.any(arr <= 0):
                    raise DomainError(f"{name}^({e}) needs {name} > 0 on the whole grid")
                if e < 0 and np.any(arr == 0):
                    raise DomainError(f"{name}^({e}) is singular at {name} = 0")
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for k, c in self._terms.items():
            scale = complex(c) * alpha ** k.alpha * hbar ** k.hbar
            if scale == 0:
                continue
            out += scale * np.power(x, float(k.x)) * np.power(y, float(k.y))
        return out

    def evaluate_exact(self, x, y, alpha=1, hbar=0) -> GaussianRational:
        """Exact value at a rational point; fractional powers must be exact."""
        x, y = Fraction(x), Fraction(y)
        self._check_domain(x, y)
        total = ZERO_C
        for k, c in self._terms.items():
            v = c * (Fraction(alpha) ** k.alpha) * (Fraction(hbar) ** k.hbar)
            for base, e, name in ((x, k.x, "x"), (y, k.y, "y")):
                if not e:
                    continue
                if e.denominator == 1:
                    v = v * base ** int(e)
                    continue
                root = _exact_root(base, e.denominator)
                if root is None:
                    raise DomainError(f"{name}^({e}) is irrational at {name} = {base}")
                v = v * root ** e.numerator
            total = total + v
        return total

    # comparison and printing ------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Expression):
            return self._terms == other._terms
        try:
            return self._terms == Expression.const(other)._terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def sorted_items(self) -> list:
        return sorted(self._terms.items(), key=lambda kv: kv[0])

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for k, c in self.sorted_items():
            factors = [_fmt_exp(n, e) for n, e in zip(_VARS, k) if e]
            if c.im and c.re:
                sign, mag = "+", f"({c.re}{'+' if c.im > 0 else '-'}{_fmt_im(abs(c.im))})"
            elif c.im:
                sign = "-" if c.im < 0 else "+"
                mag = _fmt_im(abs(c.im))
            else:
                sign = "-" if c.re < 0 else "+"
                mag = "" if abs(c.re) == 1 and factors else str(abs(c.re))
            body = "*".join(([mag] if mag else []) + factors)
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Expression({str(self)!r})"


def join_terms(parts: Iterable[str]) -> str:
    """Join printed summands, folding a leading minus into the separator."""
    out = ""
    for part in parts:
        if not out:
            out = part
        elif part.startswith("-"):
            out += " - " + part[1:]
        else:
            out += " + " + part
    return out or "0"


def _fmt_im(mag: Fraction) -> str:
    return "i" if mag == 1 else f"{mag}*i"


X = Expression.var("x")
Y = Expression.var("y")
ALPHA = Expression.var("alpha")
HBAR = Expression.var("hbar")
I = Expression.const(I_C)
ONE = Expression.const(1)
ZERO = Expression()


def parse(text: str) -> Expression:
    """Parse an expression in x, y, alpha, hbar and i."""
    from .parsing import parse_expression

    return parse_expression(text)


def add(a: Expression, b: Expression) -> Expression:
    return a + b


def mul(a: Expression, b: Expression) -> Expression:
    return a * b


def neg(a: Expression) -> Expression:
    return -a


def diff(a: Expression, var: str) -> Expression:
    return a.diff(var)


def eval_numeric(a: Expression, x: float, y: float, alpha: float, hbar: float) -> complex:
    return a.evaluate(x, y, alpha, hbar)


def substitute_hbar_zero(a: Expression) -> Expression:
    return a.substitute_hbar_zero()


def sum_expressions(items: Iterable[Expression]) -> Expression:
    total = ZERO
    for e in items:
        total = total + e
    return total
