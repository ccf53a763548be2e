"""The concrete nonseparable superintegrable system and its verification suites."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import detsys
from .detsys import ACoeffs
from .phasepoly import PhasePoint, PhasePolynomial, jacobian_rank, poisson_bracket
from .symexpr import HBAR, I, Expression, parse
from .weylop import (
    WeylOperator,
    adjoint,
    anticommutator,
    apply_on_grid,
    classical_limit,
    commutator,
    interior_norm,
)

SCHEMA_VERSION = 1
PROBE = dict(x=2.0, y=0.5, alpha=1.0, hbar=1.0)
RANK_PROBES = (PhasePoint(1, 0, 0, 1), PhasePoint(8, 0, 0, 1), PhasePoint(27, 0, 0, 1))

V_QUANTUM = parse("alpha*y*x^(-2/3) - 5/72*hbar^2*x^(-2)")
V_CLASSICAL = V_QUANTUM.substitute_hbar_zero()


# -- reports -------------------------------------------------------------------

@dataclass
class Check:
    id: str
    description: str
    status: str  # "pass" | "fail" | "recorded"
    residual_terms: int | None = None
    residual_max_at_probe: float | None = None
    detail: str = ""
    data: dict = field(default_factory=dict)
    millis: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "description": self.description,
            "status": self.status,
            "residual_terms": self.residual_terms,
            "residual_max_at_probe": self.residual_max_at_probe,
        }
        if self.detail:
            out["detail"] = self.detail
        if self.data:
            out["data"] = self.data
        return out


@dataclass
class VerificationReport:
    suite: str
    checks: list[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        self.checks.sort(key=lambda c: c.id)
        return check

    def run(self, id: str, description: str, fn: Callable[[], Check]) -> Check:
        t0 = time.perf_counter()
        check = fn()
        check.id = id
        check.description = description
        check.millis = (time.perf_counter() - t0) * 1000.0
        return self.add(check)

    def get(self, id: str) -> Check:
        return next(c for c in self.checks if c.id == id)

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    def to_dict(self, timing: bool = False) -> dict:
        out: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "ok": self.ok,
            "checks": [c.to_dict() for c in self.checks],
        }
        if timing:
            out["timing"] = {c.id: {"millis": round(c.millis, 3)} for c in self.checks}
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=False)

    def to_text(self, timing: bool = False) -> str:
        lines = [f"== {self.suite} =="]
        for c in self.checks:
            line = f"[{c.status.upper():8s}] {c.id}: {c.description}"
            if c.residual_terms:
                line += f" (residual terms={c.residual_terms}, max@probe={c.residual_max_at_probe:.3e})"
            if c.detail:
                line += f" -- {c.detail}"
            if timing:
                line += f" [{c.millis:.1f} ms]"
            lines.append(line)
        return "\n".join(lines)


def residual_summary(obj) -> tuple[int, float]:
    """Term count and largest coefficient magnitude at the probe point."""
    if isinstance(obj, Expression):
        coeffs = [obj]
    else:
        coeffs = [c for _, c in obj.items()]
    terms = sum(len(c) for c in coeffs)
    mags = [abs(c.evaluate(PROBE["x"], PROBE["y"], PROBE["alpha"], PROBE["hbar"])) for c in coeffs]
    return terms, float(max(mags, default=0.0))


def zero_check(obj) -> Check:
    terms, mag = residual_summary(obj)
    return Check("", "", "pass" if terms == 0 else "fail", terms, mag)


# -- systems -------------------------------------------------------------------

@dataclass
class SystemSpec:
    name: str
    flavor: str  # "classical" | "quantum"
    V: Expression
    hamiltonian: PhasePolynomial | WeylOperator
    integrals: dict[str, PhasePolynomial | WeylOperator]
    expected_xy: Expression | None = None

    @property
    def quantum(self) -> bool:
        return self.flavor == "quantum"


def _sym(f: str | Expression, k: int, l: int) -> WeylOperator:
    """The anticommutator ``{f, p1^k p2^l}`` (no factor 1/2)."""
    f = parse(f) if isinstance(f, str) else f
    return anticommutator(WeylOperator.function(f), WeylOperator.momentum(k, l))


def quantum_hamiltonian(V: Expression) -> WeylOperator:
    return detsys.hamiltonian_operator(V)


def quantum_x(g2_correction: bool = True) -> WeylOperator:
    g2 = "3*alpha*y*x^(-2/3) - 5/24*hbar^2*x^(-2)" if g2_correction else "3*alpha*y*x^(-2/3)"
    return (WeylOperator.momentum(2, 1) * 3 + WeylOperator.momentum(0, 3) * 2
            + _sym("9/2*alpha*x^(1/3)", 1, 0) + _sym(g2, 0, 1))


def quantum_y() -> WeylOperator:
    return (WeylOperator.momentum(4, 0)
            + _sym("2*alpha*y*x^(-2/3) - 5/36*hbar^2*x^(-2)", 2, 0)
            - _sym("6*alpha*x^(1/3)", 1, 1)
            + WeylOperator.function(parse(
                "-2*alpha^2*(9*x^2 - 2*y^2)*x^(-4/3) - 5/9*alpha*hbar^2*y*x^(-8/3)"
                " + 25/1296*hbar^4*x^(-4)")))


def classical_x() -> PhasePolynomial:
    return (PhasePolynomial.momentum(2, 1, 3) + PhasePolynomial.momentum(0, 3, 2)
            + PhasePolynomial.momentum(1, 0, parse("9*alpha*x^(1/3)"))
            + PhasePolynomial.momentum(0, 1, parse("6*alpha*y*x^(-2/3)")))


def classical_y() -> PhasePolynomial:
    return (PhasePolynomial.momentum(4, 0)
            + PhasePolynomial.momentum(2, 0, parse("4*alpha*y*x^(-2/3)"))
            - PhasePolynomial.momentum(1, 1, parse("12*alpha*x^(1/3)"))
            + PhasePolynomial.function(parse("-2*alpha^2*(9*x^2 - 2*y^2)*x^(-4/3)")))


def nonseparable_system(flavor: str = "classical") -> SystemSpec:
    if flavor == "quantum":
        return SystemSpec("quantum nonseparable system", "quantum", V_QUANTUM,
                          quantum_hamiltonian(V_QUANTUM),
                          {"X": quantum_x(), "Y": quantum_y()})
    if flavor == "classical":
        return SystemSpec("classical nonseparable system", "classical", V_CLASSICAL,
                          detsys.hamiltonian_phase(V_CLASSICAL),
                          {"X": classical_x(), "Y": classical_y()},
                          # reference value; its sign depends on the bracket convention
                          expected_xy=parse("-108*alpha^3"))
    raise ValueError(f"flavor must be 'classical' or 'quantum', not {flavor!r}")


def classical_counterpart(spec: SystemSpec) -> SystemSpec:
    if not spec.quantum:
        return spec
    return SystemSpec(spec.name + " (classical limit)", "classical", spec.V.substitute_hbar_zero(),
                      classical_limit(spec.hamiltonian),
                      {k: classical_limit(v) for k, v in spec.integrals.items()})


# -- theorem suite -------------------------------------------------------------

def _bracket(spec: SystemSpec, a, b):
    return commutator(a, b) if spec.quantum else poisson_bracket(a, b)


def verify_theorem(spec: SystemSpec, probes: Sequence[PhasePoint] = RANK_PROBES) -> VerificationReport:
    """Commutation, algebra, self-adjointness, independence and order-2 checks."""
    report = VerificationReport(spec.name)
    H = spec.hamiltonian
    names = list(spec.integrals)
    Xn, Yn = names[0], names[1]
    X, Y = spec.integrals[Xn], spec.integrals[Yn]
    br = "[,]" if spec.quantum else "{,}"

    for n in names:
        report.run(f"comm.H{n}", f"{br} of H with {n} vanishes exactly",
                   lambda n=n: zero_check(_bracket(spec, H, spec.integrals[n])))

    def algebra():
        xy = _bracket(spec, X, Y)
        terms, mag = residual_summary(xy)
        e = xy.as_expression()
        if e is None or not e.is_constant():
            return Check("", "", "fail", terms, mag, detail=f"not central: {xy}")
        data = {"value": str(e)}
        if spec.quantum:
            return Check("", "", "recorded", terms, mag,
                         detail=f"[{Xn},{Yn}] = ({e})*1", data=data)
        if spec.expected_xy is None:
            return Check("", "", "recorded", terms, mag, detail=f"{{{Xn},{Yn}}} = {e}", data=data)
        if e == spec.expected_xy:
            sign = "same sign as"
        elif e == -spec.expected_xy:
            sign = "opposite sign to"
        else:
            return Check("", "", "fail", terms, mag, detail=f"{e} != +-({spec.expected_xy})", data=data)
        data["sign_vs_expected"] = sign.split()[0]
        return Check("", "", "pass", terms, mag,
                     detail=f"{{{Xn},{Yn}}} = {e} under {{x,p1}} = +1 ({sign} {spec.expected_xy})",
                     data=data)

    report.run("alg.XY", f"{br} of {Xn} with {Yn} is a central constant", algebra)

    if spec.quantum:
        def limit_consistency():
            xy = commutator(X, Y)
            # (1/(i hbar)) [A, B] -> {a, b}
            scaled = xy.map_coefficients(lambda c: c / (I * HBAR))
            lhs = classical_limit(scaled)
            rhs = poisson_bracket(classical_limit(X), classical_limit(Y))
            diff = lhs - rhs
            chk = zero_check(diff)
            chk.detail = f"lim (1/(i hbar))[X,Y] = {lhs}"
            return chk

        report.run("alg.XY.limit", "(1/(i hbar))[X,Y] has the classical bracket as its limit",
                   limit_consistency)
        for n, op in [("H", H)] + list(spec.integrals.items()):
            report.run(f"sa.{n}", f"{n} is formally self-adjoint",
                       lambda op=op: zero_check(adjoint(op) - op))

    cl = classical_counterpart(spec)

    def rank_check():
        fns = [cl.hamiltonian, cl.integrals[Xn], cl.integrals[Yn]]
        ranks = [jacobian_rank(fns, p, alpha=1) for p in probes]
        status = "pass" if all(r == 3 for r in ranks) else "fail"
        pts = [f"({p.x},{p.y},{p.p1},{p.p2})" for p in probes]
        return Check("", "", status, detail=f"ranks {ranks} at {pts}, alpha=1",
                     data={"ranks": ranks})

    report.run("rank.J", "Jacobian of (H, X, Y) has rank 3 at exact probe points", rank_check)

    h_lead = detsys.hamiltonian_power_leading(2)

    def order2_linear():
        space = detsys.solve_admissible_A(2, spec.V)
        ok = space.dimension == 1 and space.contains(h_lead)
        return Check("", "", "pass" if ok else "fail",
                     detail=f"null space {[str(b) for b in space.basis]} (necessary condition)",
                     data=space.to_dict())

    report.run("ord2.linear", "order-2 admissible leading terms are exactly span{H}", order2_linear)

    def order2_closure():
        res = detsys.close_integrals(2, spec.V, quantum=spec.quantum)
        ok = res.dimension == 1 and res.contains(h_lead)
        return Check("", "", "pass" if ok else "fail",
                     detail=f"genuine order-2 integrals {[str(b) for b in res.basis]} (exact within ansatz)",
                     data=res.to_dict())

    report.run("ord2.closure", "full order-2 bracket system admits only H", order2_closure)
    return report


def classical_limit_report() -> VerificationReport:
    q, c = nonseparable_system("quantum"), nonseparable_system("classical")
    report = VerificationReport("classical limit")
    report.run("limit.H", "classical limit of quantum H equals classical H",
               lambda: zero_check(classical_limit(q.hamiltonian) - c.hamiltonian))
    for n in ("X", "Y"):
        report.run(f"limit.{n}", f"classical limit of quantum {n} equals classical {n}",
                   lambda n=n: zero_check(classical_limit(q.integrals[n]) - c.integrals[n]))
    return report


def necessity_report() -> VerificationReport:
    """Dropping either hbar^2 correction must break [H, X] = 0."""
    report = VerificationReport("quantum-correction necessity")
    X = quantum_x()

    def broken(residual):
        terms, mag = residual_summary(residual)
        return Check("", "", "pass" if terms else "fail", terms, mag,
                     detail="residual operator is nonzero" if terms else "residual unexpectedly zero")

    report.run("need.V", "without -5hbar^2/(72x^2) in V, [H,X] != 0",
               lambda: broken(commutator(quantum_hamiltonian(V_CLASSICAL), X)))
    report.run("need.g2", "without -5hbar^2/(24x^2) in X, [H,X] != 0",
               lambda: broken(commutator(quantum_hamiltonian(V_QUANTUM), quantum_x(g2_correction=False))))
    return report


# -- Drach and ansatz families -------------------------------------------------

@dataclass(frozen=True)
class DrachParams:
    a: Fraction
    b: Fraction
    c: Fraction

    def potential(self) -> Expression:
        x23 = parse("x^(-2/3)")
        return x23 * (Expression.const(Fraction(self.a)) + parse("y") * Fraction(self.b)
                      + parse("4*x^2 + 3*y^2") * Fraction(self.c))


X_DIRECTION = ACoeffs.from_labels(3, A021=3, A003=2)


def drach_suite(params: DrachParams) -> VerificationReport:
    """Admissibility of third/fourth order leading terms for a Drach potential.

    Linear results are necessary conditions only; closure results are exact
    but relative to a finite ansatz for the lower coefficient functions.
    """
    V = params.potential()
    report = VerificationReport(f"drach a={params.a} b={params.b} c={params.c}")
    h2 = detsys.hamiltonian_power_leading(4)

    def ord3_linear():
        space = detsys.solve_admissible_A(3, V)
        has = space.contains(X_DIRECTION)
        basis = [str(b) for b in space.basis]
        if params.c == 0:
            return Check("", "", "pass" if has else "fail",
                         detail=f"necessary-condition: basis {basis}; (3,2) direction "
                                f"{'found' if has else 'missing'}", data=space.to_dict())
        return Check("", "", "recorded", detail=f"necessary-condition: basis {basis}",
                     data=space.to_dict())

    def ord3_closure():
        res = detsys.close_integrals(3, V, quantum=False)
        basis = [str(b) for b in res.basis]
        return Check("", "", "recorded",
                     detail=f"exact-within-ansatz: genuine third-order leading terms {basis}",
                     data=res.to_dict())

    def ord4_linear():
        space = detsys.solve_admissible_A(4, V)
        extra = space.extra_dimension([h2])
        has = space.contains(h2)
        data = space.to_dict()
        data["extra_dimension"] = extra
        return Check("", "", "pass" if has else "fail",
                     detail=f"necessary-condition: basis {[str(b) for b in space.basis]}; "
                            f"H^2 {'present' if has else 'MISSING'}; "
                            f"{extra} extra direction(s) beyond H^2",
                     data=data)

    def ord4_closure():
        res = detsys.close_integrals(4, V, quantum=False)
        extra = res.extra_dimension([h2])
        data = res.to_dict()
        data["extra_dimension"] = extra
        return Check("", "", "recorded",
                     detail=f"exact-within-ansatz: {extra} fourth-order integral direction(s) "
                            f"beyond H^2; basis {[str(b) for b in res.basis]}",
                     data=data)

    report.run("drach.ord3.linear", "third-order linear compatibility null space", ord3_linear)
    report.run("drach.ord3.closure", "third-order full bracket system", ord3_closure)
    report.run("drach.ord4.linear", "fourth-order linear compatibility null space", ord4_linear)
    report.run("drach.ord4.closure", "fourth-order full bracket system", ord4_closure)
    return report


@dataclass(frozen=True)
class AnsatzPotential:
    """``V = w1(x) * y + w0(x)``."""

    w1: Expression
    w0: Expression = field(default_factory=Expression)

    def __post_init__(self):
        w1, w0 = Expression.coerce(self.w1), Expression.coerce(self.w0)
        if w1.is_zero():
            raise ValueError("the ansatz requires w1 != 0")
        for name, w in (("w1", w1), ("w0", w0)):
            if w.max_power("y") or w.min_power("y"):
                raise ValueError(f"{name} must depend on x only")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w0", w0)

    def potential(self) -> Expression:
        return self.w1 * parse("y") + self.w0


def ansatz_check(p: AnsatzPotential) -> VerificationReport:
    V = p.potential()
    report = VerificationReport(f"ansatz V = {V}")

    def linear():
        space = detsys.solve_admissible_A(3, V)
        return Check("", "", "recorded",
                     detail=f"necessary-condition: basis {[str(b) for b in space.basis]}",
                     data=space.to_dict())

    def closure():
        res = detsys.close_integrals(3, V)
        found = res.dimension > 0
        return Check("", "", "recorded",
                     detail=("nontrivial third-order integral found: " if found else
                             "no third-order integral (exact within ansatz)")
                     + ", ".join(str(b) for b in res.basis),
                     data=res.to_dict())

    report.run("ansatz.ord3.linear", "third-order linear compatibility null space", linear)
    report.run("ansatz.ord3.closure", "third-order full bracket system", closure)
    return report


def verify_all() -> list[VerificationReport]:
    return [
        verify_theorem(nonseparable_system("quantum")),
        verify_theorem(nonseparable_system("classical")),
        classical_limit_report(),
        necessity_report(),
    ]


# -- grid cross-check ----------------------------------------------------------

@dataclass(frozen=True)
class GridStudy:
    sizes: tuple[int, ...]
    ratios: tuple[float, ...]

    @property
    def monotone(self) -> bool:
        return all(b < a for a, b in zip(self.ratios, self.ratios[1:]))

    def rates(self) -> list[float]:
        """Observed convergence orders between successive refinements."""
        out = []
        for (n0, r0), (n1, r1) in zip(zip(self.sizes, self.ratios), zip(self.sizes[1:], self.ratios[1:])):
            out.append(math.log(r0 / r1) / math.log((n1 - 1) / (n0 - 1)))
        return out


def grid_commutator_study(sizes: Sequence[int] = (41, 81, 161), sigma: float = 0.3,
                          window: float = 0.6, alpha: float = 1.0, hbar: float = 1.0) -> GridStudy:
    """``||H(X psi) - X(H psi)|| / ||psi||`` for a Gaussian on [1, 3] x [-1, 1].

    Both products are applied by finite differences, so the ratio measures the
    discretisation error of an exactly vanishing commutator.  Norms are taken
    on the fixed window ``|x - 2|, |y| <= window`` so the region does not move
    with the grid.
    """
    H, X = quantum_hamiltonian(V_QUANTUM), quantum_x()
    ratios = []
    for n in sizes:
        xs, ys = np.linspace(1.0, 3.0, n), np.linspace(-1.0, 1.0, n)
        XX, YY = np.meshgrid(xs, ys, indexing="ij")
        psi = np.exp(-((XX - 2.0) ** 2 + YY ** 2) / (2 * sigma ** 2)).astype(complex)
        hx, hy = xs[1] - xs[0], ys[1] - ys[0]
        r = (apply_on_grid(H, apply_on_grid(X, psi, xs, ys, alpha, hbar), xs, ys, alpha, hbar)
             - apply_on_grid(X, apply_on_grid(H, psi, xs, ys, alpha, hbar), xs, ys, alpha, hbar))
        mask = (np.abs(XX - 2.0) <= window + 1e-12) & (np.abs(YY) <= window + 1e-12)
        if not np.all(np.isfinite(r[mask])):
            raise ValueError(f"grid n={n} too coarse: window reaches the stencil boundary band")
        ratios.append(interior_norm(r, hx, hy, mask) / interior_norm(psi, hx, hy, mask))
    return GridStudy(tuple(sizes), tuple(ratios))
