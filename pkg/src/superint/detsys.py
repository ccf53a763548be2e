"""Leading terms in the e(2) enveloping algebra and the linear determining systems.

Everything here is generated from the bracket structure rather than from a
table of printed equations: the f-polynomials are read off the expanded
leading term, the linear determining equations are the top-but-one momentum
degree of ``{H, X}``, and the compatibility condition is the alternating
cross-derivative that eliminates the unknown functions ``g``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from . import exactla
from .phasepoly import PhasePolynomial, poisson_bracket
from .symexpr import Expression, X, Y
from .weylop import WeylOperator, commutator, compose, symmetrize

ORDERS = (2, 3, 4)


def a_keys(order: int) -> list[tuple[int, int, int]]:
    """Index triples (j, k, l), j+k+l = order, in descending lexicographic order."""
    return sorted(((j, k, order - j - k) for j in range(order + 1) for k in range(order + 1 - j)),
                  reverse=True)


def a_label(key: tuple[int, int, int]) -> str:
    return "A_" + "".join(str(v) for v in key)


@dataclass(frozen=True)
class ACoeffs:
    """Real constants multiplying ``L3^j p1^k p2^l`` in a leading term."""

    order: int
    entries: Mapping[tuple[int, int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, v in dict(self.entries).items():
            key = tuple(int(t) for t in key)
            if len(key) != 3 or sum(key) != self.order or min(key) < 0:
                raise ValueError(f"index {key} does not belong to order {self.order}")
            v = Fraction(v)
            if v:
                clean[key] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def unit(cls, order: int, key) -> "ACoeffs":
        return cls(order, {tuple(key): 1})

    @classmethod
    def from_vector(cls, order: int, vec: Sequence) -> "ACoeffs":
        return cls(order, dict(zip(a_keys(order), vec)))

    @classmethod
    def from_labels(cls, order: int, **labels) -> "ACoeffs":
        """``ACoeffs.from_labels(3, A021=3, A003=2)``."""
        return cls(order, {tuple(int(ch) for ch in name[1:]): v for name, v in labels.items()})

    def vector(self) -> list[Fraction]:
        return [self.entries.get(k, Fraction(0)) for k in a_keys(self.order)]

    def get(self, key) -> Fraction:
        return self.entries.get(tuple(key), Fraction(0))

    def is_zero(self) -> bool:
        return not self.entries

    def to_dict(self) -> dict[str, str]:
        return {a_label(k): str(v) for k, v in sorted(self.entries.items(), reverse=True)}

    def __str__(self):
        if not self.entries:
            return "0"
        return ", ".join(f"{k}={v}" for k, v in self.to_dict().items())


L3_CLASSICAL = PhasePolynomial({(0, 1): X, (1, 0): -Y})
L3_QUANTUM = compose(WeylOperator.function(X), WeylOperator.momentum(0, 1)) - \
    compose(WeylOperator.function(Y), WeylOperator.momentum(1, 0))


@lru_cache(maxsize=None)
def _leading_classical_unit(key) -> PhasePolynomial:
    j, k, l = key
    return L3_CLASSICAL ** j * PhasePolynomial.momentum(k, l)


@lru_cache(maxsize=None)
def _leading_quantum_unit(key) -> WeylOperator:
    j, k, l = key
    L = L3_QUANTUM ** j
    P = WeylOperator.momentum(k, l)
    return (compose(L, P) + compose(P, L)) * Fraction(1, 2)


def expand_leading(A: ACoeffs) -> PhasePolynomial:
    """Classical leading term ``sum A_jkl L3^j p1^k p2^l``."""
    out = PhasePolynomial()
    for key, v in A.entries.items():
        out = out + _leading_classical_unit(key) * v
    return out


def expand_leading_quantum(A: ACoeffs) -> WeylOperator:
    """Quantum leading term ``sum A_jkl (1/2){L3^j, p1^k p2^l}``."""
    out = WeylOperator()
    for key, v in A.entries.items():
        out = out + _leading_quantum_unit(key) * v
    return out


def build_fpolys(A: ACoeffs) -> list[Expression]:
    """``f_i`` = coefficient of ``p1^(n+1-i) p2^(i-1)`` in the leading term."""
    lead = expand_leading(A)
    n = A.order
    return [lead.coefficient(n - m, m) for m in range(n + 1)]


def fpolys_symbolic(order: int) -> dict[tuple[int, int, int], list[Expression]]:
    """The f-polynomials of each unit A entry; f is linear in A."""
    return {key: build_fpolys(ACoeffs.unit(order, key)) for key in a_keys(order)}


@dataclass(frozen=True)
class IntegralCandidate:
    """A trial integral: leading term plus lower-order coefficient functions.

    ``g`` lists the coefficients of ``p1^(n-2-m) p2^m`` (for order 2 this is
    the single function ``ell``); ``ell`` is the order-0 term of a fourth
    order integral.
    """

    A: ACoeffs
    g: tuple[Expression, ...] = ()
    ell: Expression = field(default_factory=Expression)

    def __post_init__(self):
        n = self.A.order
        g = tuple(Expression.coerce(e) for e in self.g)
        if not g:
            g = (Expression(),) * (n - 1)
        if len(g) != n - 1:
            raise ValueError(f"order {n} candidate needs {n - 1} lower coefficient functions")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "ell", Expression.coerce(self.ell))

    @property
    def order(self) -> int:
        return self.A.order

    def lower_block(self) -> PhasePolynomial:
        n = self.order
        return PhasePolynomial({(n - 2 - m, m): gm for m, gm in enumerate(self.g)})

    def phase(self) -> PhasePolynomial:
        return expand_leading(self.A) + self.lower_block() + PhasePolynomial.function(self.ell)

    def operator(self) -> WeylOperator:
        n = self.order
        op = expand_leading_quantum(self.A)
        for m, gm in enumerate(self.g):
            op = op + symmetrize(gm, n - 2 - m, m)
        return op + WeylOperator.function(self.ell)


def hamiltonian_phase(V: Expression) -> PhasePolynomial:
    return PhasePolynomial({(2, 0): Fraction(1, 2), (0, 2): Fraction(1, 2), (0, 0): V})


def hamiltonian_operator(V: Expression) -> WeylOperator:
    return (WeylOperator.momentum(2, 0) + WeylOperator.momentum(0, 2)) * Fraction(1, 2) \
        + WeylOperator.function(V)


def _potential_terms(order: int, V: Expression, lead: PhasePolynomial) -> list[Expression]:
    """Coefficients of ``V_x F_p1 + V_y F_p2`` at momentum degree ``order - 1``."""
    t = lead.diff("p1") * V.diff("x") + lead.diff("p2") * V.diff("y")
    return [t.coefficient(order - 1 - m, m) for m in range(order)]


def linear_determining_residuals(order: int, V: Expression, cand: IntegralCandidate) -> list[Expression]:
    """LHS - RHS of each linear determining equation.

    Equation ``m`` reads ``g_(m),x + g_(m-1),y = [V_x F_p1 + V_y F_p2]_m``
    where ``[.]_m`` is the coefficient of ``p1^(n-1-m) p2^m``.
    """
    if cand.order != order:
        raise ValueError(f"candidate has order {cand.order}, expected {order}")
    V = Expression.coerce(V)
    rhs = _potential_terms(order, V, expand_leading(cand.A))
    G = cand.lower_block()
    lhs_poly = PhasePolynomial.momentum(1, 0) * G.diff("x") + PhasePolynomial.momentum(0, 1) * G.diff("y")
    return [lhs_poly.coefficient(order - 1 - m, m) - r for m, r in enumerate(rhs)]


def _cross_eliminate(order: int, rhs: Sequence[Expression]) -> Expression:
    # sum_m (-1)^m d_x^m d_y^(n-1-m) RHS_m cancels every g
    total = Expression()
    for m, r in enumerate(rhs):
        term = r.diff_n(m, order - 1 - m)
        total = total + term if m % 2 == 0 else total - term
    return total


def compatibility_expression(order: int, V: Expression) -> dict[tuple[int, int, int], Expression]:
    """Compatibility condition of the linear system, one Expression per unit A entry."""
    V = Expression.coerce(V)
    return {key: _cross_eliminate(order, _potential_terms(order, V, _leading_classical_unit(key)))
            for key in a_keys(order)}


def compatibility_at(order: int, V: Expression, A: ACoeffs) -> Expression:
    per_unit = compatibility_expression(order, V)
    total = Expression()
    for key, v in A.entries.items():
        total = total + per_unit[key] * v
    return total


@dataclass
class AdmissibleSpace:
    """Null space of the linear compatibility system for one order and potential."""

    order: int
    potential: Expression
    basis: list[ACoeffs]
    equations: int
    unknowns: int
    rank: int

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def contains(self, A: ACoeffs) -> bool:
        return exactla.in_span(A.vector(), [b.vector() for b in self.basis])

    def extra_dimension(self, trivial: Sequence[ACoeffs]) -> int:
        """Dimension left after quotienting by the span of ``trivial`` directions."""
        triv = [t.vector() for t in trivial if self.contains(t)]
        return self.dimension - (exactla.rank(triv) if triv else 0)

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "potential": str(self.potential),
            "unknowns": [a_label(k) for k in a_keys(self.order)],
            "equations": self.equations,
            "rank": self.rank,
            "dimension": self.dimension,
            "basis": [b.to_dict() for b in self.basis],
            "verdict": "necessary-condition",
        }


def linear_system(order: int, V: Expression) -> list[list[Fraction]]:
    """Rows indexed by (monomial, real/imag part), columns by A entry."""
    per_unit = compatibility_expression(order, V)
    keys = a_keys(order)
    monomials = sorted({m for e in per_unit.values() for m, _ in e.items()})
    rows = []
    for mono in monomials:
        for part in ("re", "im"):
            row = [getattr(per_unit[k].coefficient(mono), part) for k in keys]
            if any(row):
                rows.append(row)
    return rows


def solve_admissible_A(order: int, V: Expression) -> AdmissibleSpace:
    """Exact basis of leading terms passing the linear compatibility condition.

    This is a necessary condition only: a direction in the basis still has to
    close the nonlinear equations to be a genuine integral.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    V = Expression.coerce(V)
    rows = linear_system(order, V)
    n = len(a_keys(order))
    basis = exactla.nullspace(rows, n)
    return AdmissibleSpace(order=order, potential=V,
                           basis=[ACoeffs.from_vector(order, v) for v in basis],
                           equations=len(rows), unknowns=n, rank=n - len(basis))


def hamiltonian_power_leading(order: int) -> ACoeffs | None:
    """Leading term of ``H^(order/2)`` (times 2^(order/2)) for even orders."""
    if order % 2:
        return None
    lead = PhasePolynomial({(2, 0): 1, (0, 2): 1}) ** (order // 2)
    return ACoeffs(order, {(0, k, l): c.coefficient(_unit_key()).re for (k, l), c in lead.items()})


def _unit_key():
    from .symexpr import UNIT_KEY

    return UNIT_KEY


def commutator_residual(V: Expression, cand: IntegralCandidate, quantum: bool = True):
    """Full ``[H, X]`` (quantum) or ``{H, X}`` (classical) for a candidate."""
    if quantum:
        return commutator(hamiltonian_operator(V), cand.operator())
    return poisson_bracket(hamiltonian_phase(V), cand.phase())


def nonlinear_residual(V: Expression, cand: IntegralCandidate, quantum: bool = True) -> Expression:
    """Zeroth-order (in the momenta) component of the bracket with H.

    This is the content of the nonlinear determining equation(s); recomputing
    it avoids transcribing printed coefficients.
    """
    res = commutator_residual(V, cand, quantum)
    return res.coefficient(0, 0)


# -- full linear closure for a fixed potential ---------------------------------

def _candidate_keys(V: Expression, order: int, quantum: bool, for_ell: bool) -> list:
    """Finite monomial ansatz for the lower coefficient functions.

    Shifts of the potential's own monomials (and of products of pairs for the
    order-0 term) by small integer powers of x and y, with extra hbar^2 layers
    in the quantum case.
    """
    from .symexpr import MonomialKey, UNIT_KEY

    seeds = {UNIT_KEY} | {k for k, _ in V.items()}
    if for_ell:
        seeds |= {a.mul(b) for a in list(seeds) for b in list(seeds)}
    hbar_steps = (0, 2, 4) if quantum else (0,)
    keys = set()
    for s in seeds:
        for a in range(-3, order + 1):
            for b in range(-order, order + 1):
                ye = s.y + b
                if ye < 0 or ye > order + 2 * max(0, V.max_power("y")):
                    continue
                for h in hbar_steps:
                    if s.hbar + h > 4:
                        continue
                    keys.add(MonomialKey(s.x + a, ye, s.alpha, s.hbar + h))
    return sorted(keys)


@dataclass
class ClosureResult:
    """Genuine integrals (within the ansatz) of one order for a fixed potential."""

    order: int
    potential: Expression
    quantum: bool
    basis: list[ACoeffs]
    witnesses: list[IntegralCandidate]
    unknowns: int
    equations: int

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def contains(self, A: ACoeffs) -> bool:
        return exactla.in_span(A.vector(), [b.vector() for b in self.basis])

    def extra_dimension(self, trivial: Sequence[ACoeffs]) -> int:
        triv = [t.vector() for t in trivial if self.contains(t)]
        return self.dimension - (exactla.rank(triv) if triv else 0)

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "potential": str(self.potential),
            "quantum": self.quantum,
            "unknowns": self.unknowns,
            "equations": self.equations,
            "dimension": self.dimension,
            "basis": [b.to_dict() for b in self.basis],
            "verdict": "exact-within-ansatz",
        }


def close_integrals(order: int, V: Expression, quantum: bool | None = None) -> ClosureResult:
    """Solve the full bracket condition, linear in (A, g, ell) once V is fixed.

    Unknown lower coefficient functions are expanded over a finite monomial
    ansatz; every direction returned is a verified integral, while absence is
    only established relative to that ansatz.
    """
    V = Expression.coerce(V)
    if quantum is None:
        quantum = V.max_power("hbar") > 0
    n = order
    H = hamiltonian_operator(V) if quantum else hamiltonian_phase(V)

    def bracket(piece):
        if quantum:
            return commutator(H, piece)
        return poisson_bracket(H, piece)

    columns: list = []  # (kind, index, key)
    pieces: list = []
    for key in a_keys(n):
        columns.append(("A", key, None))
        pieces.append(_leading_quantum_unit(key) if quantum else _leading_classical_unit(key))
    g_keys = _candidate_keys(V, n, quantum, for_ell=(n == 2))
    for m in range(n - 1):
        for mk in g_keys:
            f = Expression({mk: 1})
            columns.append(("g", m, mk))
            pieces.append(symmetrize(f, n - 2 - m, m) if quantum
                          else PhasePolynomial.momentum(n - 2 - m, m, f))
    if n == 4:
        for mk in _candidate_keys(V, n, quantum, for_ell=True):
            f = Expression({mk: 1})
            columns.append(("ell", 0, mk))
            pieces.append(WeylOperator.function(f) if quantum else PhasePolynomial.function(f))

    row_index: dict = {}
    rows: list[dict] = []
    for col, piece in enumerate(pieces):
        for mom, coeff in bracket(piece).items():
            for mono, c in coeff.items():
                for part, v in (("re", c.re), ("im", c.im)):
                    if not v:
                        continue
                    r = row_index.setdefault((mom, mono, part), len(rows))
                    if r == len(rows):
                        rows.append({})
                    rows[r][col] = v
    null = exactla.sparse_nullspace(rows, len(columns))
    na = len(a_keys(n))
    projected = [v[:na] for v in null if any(v[:na])]
    basis_vecs = exactla.row_space_basis(projected)
    basis = [ACoeffs.from_vector(n, v) for v in basis_vecs]
    witnesses = []
    for target in basis_vecs:
        # a null vector whose A part is exactly this basis vector
        comb = _express_in(target, projected, null, na)
        witnesses.append(_candidate_from_vector(n, comb, columns))
    return ClosureResult(order=n, potential=V, quantum=quantum, basis=basis,
                         witnesses=witnesses, unknowns=len(columns), equations=len(rows))


def _express_in(target, projected, null, na):
    full = [v for v in null if any(v[:na])]
    # solve sum c_i projected_i = target
    m = len(projected)
    rows = [{i: projected[i][r] for i in range(m) if projected[i][r]} | ({m: -target[r]} if target[r] else {})
            for r in range(na)]
    sol = exactla.sparse_nullspace(rows, m + 1)
    vec = next(s for s in sol if s[m])
    scale = 1 / vec[m]
    coeffs = [c * scale for c in vec[:m]]
    return [sum((c * v[j] for c, v in zip(coeffs, full)), Fraction(0)) for j in range(len(null[0]))]


def _candidate_from_vector(n: int, vec, columns) -> IntegralCandidate:
    entries = {}
    g = [Expression() for _ in range(n - 1)]
    ell = Expression()
    for v, (kind, idx, mk) in zip(vec, columns):
        if not v:
            continue
        if kind == "A":
            entries[idx] = v
        elif kind == "g":
            g[idx] = g[idx] + Expression({mk: v})
        else:
            ell = ell + Expression({mk: v})
    return IntegralCandidate(ACoeffs(n, entries), tuple(g), ell)
