"""Shared hypothesis strategies and fixtures."""
from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from superint.phasepoly import PhasePolynomial
from superint.symexpr import Expression, GaussianRational
from superint.weylop import WeylOperator

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small_rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))
x_exponents = st.builds(Fraction, st.integers(-6, 6), st.sampled_from([1, 2, 3]))
y_exponents = st.integers(0, 3).map(Fraction)


@st.composite
def gaussian(draw, real_only: bool = False):
    re = draw(small_rationals)
    im = Fraction(0) if real_only else draw(small_rationals)
    g = GaussianRational(re, im)
    return g if g else GaussianRational(1)


@st.composite
def monomials(draw, real_only: bool = False, hbar: bool = True):
    return Expression.monomial(draw(gaussian(real_only)), draw(x_exponents), draw(y_exponents),
                               draw(st.integers(0, 2)), draw(st.integers(0, 2)) if hbar else 0)


@st.composite
def expressions(draw, max_terms: int = 4, real_only: bool = False, hbar: bool = True):
    terms = draw(st.lists(monomials(real_only, hbar), min_size=0, max_size=max_terms))
    out = Expression()
    for t in terms:
        out = out + t
    return out


@st.composite
def phase_polys(draw, max_degree: int = 2, real_only: bool = True, hbar: bool = False):
    terms = {}
    for _ in range(draw(st.integers(0, 3))):
        k = draw(st.integers(0, max_degree))
        l = draw(st.integers(0, max_degree - k))
        terms[(k, l)] = draw(expressions(2, real_only, hbar))
    return PhasePolynomial(terms)


@st.composite
def operators(draw, max_order: int = 2):
    terms = {}
    for _ in range(draw(st.integers(0, 3))):
        a = draw(st.integers(0, max_order))
        b = draw(st.integers(0, max_order - a))
        terms[(a, b)] = draw(expressions(2))
    return WeylOperator(terms)


def random_monomial(rng: random.Random, integer_x: bool = False) -> Expression:
    """A real monomial in x, y with small rational exponents."""
    den = 1 if integer_x else rng.choice([1, 2, 3])
    return Expression.monomial(Fraction(rng.randint(1, 9), rng.randint(1, 4)),
                               Fraction(rng.randint(-5, 5), den), rng.randint(0, 4))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260417)


def to_sympy(e: Expression, symbols=None):
    """Exact sympy image of an Expression (oracle side of comparisons)."""
    import sympy as sp

    x, y, alpha, hbar = symbols or sp.symbols("x y alpha hbar", positive=True)
    total = sp.Integer(0)
    for k, c in e.items():
        coeff = sp.Rational(c.re.numerator, c.re.denominator) + sp.I * sp.Rational(c.im.numerator, c.im.denominator)
        total += (coeff * x ** sp.Rational(k.x.numerator, k.x.denominator)
                  * y ** sp.Rational(k.y.numerator, k.y.denominator) * alpha ** k.alpha * hbar ** k.hbar)
    return total
