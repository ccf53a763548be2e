"""Exact and numerical verification of a nonseparable superintegrable system.

Submodules
----------
symexpr    exact expressions in x, y, alpha, hbar with a parser
phasepoly  classical observables and Poisson brackets
weylop     quantum observables as normal-ordered differential operators
detsys     leading terms and linear determining systems, exact solvers
models     the concrete system, verification suites and reports
dynamics   RK4 flow with conservation-drift monitoring
cli        command-line front end
"""
from .symexpr import Expression, GaussianRational, parse
from .phasepoly import PhasePoint, PhasePolynomial, parse_phase, poisson_bracket
from .weylop import WeylOperator, commutator, parse_operator

__version__ = "0.1.0"

__all__ = [
    "Expression",
    "GaussianRational",
    "PhasePoint",
    "PhasePolynomial",
    "WeylOperator",
    "commutator",
    "parse",
    "parse_operator",
    "parse_phase",
    "poisson_bracket",
]
