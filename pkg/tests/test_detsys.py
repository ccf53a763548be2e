"""Leading terms, determining systems and the admissibility solver.

sympy serves as an independent oracle: f-polynomials come from its own
expansion of the leading term, and compatibility conditions are rebuilt with
generic functions V(x, y), f_i(x, y).
"""
import random

import pytest
import sympy as sp

from superint.detsys import (
    ACoeffs, IntegralCandidate, a_keys, build_fpolys, close_integrals, commutator_residual,
    compatibility_at, compatibility_expression, expand_leading, expand_leading_quantum,
    hamiltonian_power_leading, linear_determining_residuals, nonlinear_residual, solve_admissible_A,
)
from superint.models import V_CLASSICAL, V_QUANTUM, classical_x, quantum_x
from superint.phasepoly import parse_phase
from superint.symexpr import Expression, parse

from conftest import to_sympy

x, y, alpha, hbar = SYMS = sp.symbols("x y alpha hbar", positive=True)
P1s, P2s = sp.symbols("P1 P2")
D = sp.diff

X_DIR = ACoeffs.from_labels(3, A021=3, A003=2)
H_DIR = ACoeffs.from_labels(2, A020=1, A002=1)
H2_DIR = ACoeffs.from_labels(4, A040=1, A022=2, A004=1)
Y_DIR = ACoeffs.from_labels(4, A040=1)

G_CLASSICAL = (parse("9*alpha*x^(1/3)"), parse("6*alpha*y*x^(-2/3)"))
G_QUANTUM = (parse("9*alpha*x^(1/3)"), parse("6*alpha*y*x^(-2/3) - 5/12*hbar^2*x^(-2)"))


def sym_A(order):
    return {key: sp.Symbol("A%d%d%d" % key) for key in a_keys(order)}


def sympy_fpolys(order, A):
    lead = sp.expand(sum(a * (x * P2s - y * P1s) ** j * P1s ** k * P2s ** l for (j, k, l), a in A.items()))
    return [lead.coeff(P1s, order - m).coeff(P2s, m) for m in range(order + 1)]


# -- leading terms ------------------------------------------------------------------

def test_expand_leading_x_direction():
    assert expand_leading(X_DIR) == parse_phase("3*p1^2*p2 + 2*p2^3")


def test_expand_leading_p1_fourth():
    assert expand_leading(Y_DIR) == parse_phase("p1^4")


@pytest.mark.parametrize("n", [2, 3, 4])
def test_expand_leading_pure_rotation(n):
    assert expand_leading(ACoeffs.unit(n, (n, 0, 0))) == parse_phase("x*p2 - y*p1") ** n


def test_quantum_leading_limits_to_classical():
    from superint.weylop import classical_limit
    for order in (2, 3, 4):
        for key in a_keys(order):
            A = ACoeffs.unit(order, key)
            assert classical_limit(expand_leading_quantum(A)) == expand_leading(A)


def test_acoeffs_validation_and_labels():
    with pytest.raises(ValueError):
        ACoeffs(3, {(1, 1, 0): 1})
    assert str(X_DIR) == "A_021=3, A_003=2"
    assert ACoeffs.from_vector(3, X_DIR.vector()) == X_DIR


# -- f polynomials ------------------------------------------------------------------

def test_fpolys_x_direction():
    assert build_fpolys(X_DIR) == [parse("0"), parse("3"), parse("0"), parse("2")]


def test_fpolys_h_squared():
    assert build_fpolys(H2_DIR) == [parse(s) for s in ("1", "0", "2", "0", "1")]


def test_fpolys_pure_rotation_cubed():
    f = build_fpolys(ACoeffs.unit(3, (3, 0, 0)))
    assert f[0] == parse("-y^3") and f[3] == parse("x^3")
    assert f[1] == parse("3*x*y^2") and f[2] == parse("-3*x^2*y")


@pytest.mark.parametrize("order", [2, 3, 4])
def test_fpolys_match_sympy_expansion_for_every_unit_vector(order):
    count = 0
    for key in a_keys(order):
        expected = sympy_fpolys(order, {key: 1})
        got = [to_sympy(e, SYMS) for e in build_fpolys(ACoeffs.unit(order, key))]
        assert [sp.expand(g - e) for g, e in zip(got, expected)] == [0] * (order + 1), key
        count += 1
    assert count == {2: 6, 3: 10, 4: 15}[order]


# transcribed third-order f list, first entry carrying a suspicious y^2 on A_102
TRANSCRIBED_F3 = [
    "-A300*y**3 + A210*y**2 - A102*y**2 + A030",
    "3*A300*x*y**2 - 2*A210*x*y + A201*y**2 + A120*x - A111*y + A021",
    "-3*A300*x**2*y - 2*A201*x*y + A210*x**2 + A111*x - A102*y + A012",
    "A300*x**3 + A201*x**2 + A102*x + A003",
]

TRANSCRIBED_F4 = [
    "A400*y**4 - A310*y**3 + A220*y**2 - A130*y + A040",
    "-4*A400*x*y**3 - A301*y**3 + 3*A310*x*y**2 + A211*y**2 - 2*A220*x*y - A121*y + A130*x + A031",
    "6*A400*x**2*y**2 + 3*A301*x*y**2 - 3*A310*x**2*y + A202*y**2 + A220*x**2 - A112*y - A121*x + A022",
    "-4*A400*y*x**3 + A310*x**3 - 3*A301*x**2*y + A211*x**2 - 2*A202*x*y + A112*x - A103*y + A013",
    "A400*x**4 + A301*x**3 + A202*x**2 + A103*x + A004",
]


def _transcribed(texts, A):
    loc = {str(s): s for s in A.values()}
    loc.update(x=x, y=y)
    return [sp.sympify(t, locals=loc) for t in texts]


def test_third_order_transcribed_list_differs_only_in_first_entry():
    A = sym_A(3)
    diffs = [sp.expand(t - e) for t, e in zip(_transcribed(TRANSCRIBED_F3, A), sympy_fpolys(3, A))]
    assert diffs[1:] == [0, 0, 0]
    # the first entry needs -A120*y where the transcription has -A102*y^2
    assert diffs[0] == sp.expand(-A[(1, 0, 2)] * y ** 2 + A[(1, 2, 0)] * y)


def test_fourth_order_transcribed_list_differs_only_in_third_entry():
    A = sym_A(4)
    diffs = [sp.expand(t - e) for t, e in zip(_transcribed(TRANSCRIBED_F4, A), sympy_fpolys(4, A))]
    assert diffs[0] == diffs[1] == diffs[3] == diffs[4] == 0
    assert diffs[2] == sp.expand(-2 * A[(1, 2, 1)] * x + 2 * A[(2, 1, 1)] * x * y)


# -- linear determining equations ---------------------------------------------------

def test_linear_residuals_vanish_for_classical_x():
    res = linear_determining_residuals(3, V_CLASSICAL, IntegralCandidate(X_DIR, G_CLASSICAL))
    assert all(r.is_zero() for r in res) and len(res) == 3


def test_linear_residuals_free_motion():
    for key in a_keys(3):
        res = linear_determining_residuals(3, Expression(), IntegralCandidate(ACoeffs.unit(3, key)))
        assert all(r.is_zero() for r in res)


def test_linear_residuals_vanish_for_quantum_x():
    res = linear_determining_residuals(3, V_QUANTUM, IntegralCandidate(X_DIR, G_QUANTUM))
    assert all(r.is_zero() for r in res)


def test_order_mismatch_rejected():
    with pytest.raises(ValueError):
        linear_determining_residuals(4, V_CLASSICAL, IntegralCandidate(X_DIR, G_CLASSICAL))


def test_second_equation_needs_f3_not_f2():
    f = build_fpolys(X_DIR)
    V = V_CLASSICAL
    g2_y = G_CLASSICAL[1].diff("y")
    assert g2_y == f[2] * V.diff("x") + 3 * f[3] * V.diff("y")
    assert g2_y != f[1] * V.diff("x") + 3 * f[3] * V.diff("y")


def test_linear_residuals_agree_with_direct_bracket():
    # the degree n-1 part of {H, X} is the linear system, up to sign
    cand = IntegralCandidate(ACoeffs.from_labels(3, A021=1, A111=2), (parse("x*y^2"), parse("x^(1/3)")))
    br = commutator_residual(V_CLASSICAL, cand, quantum=False)
    res = linear_determining_residuals(3, V_CLASSICAL, cand)
    for m, r in enumerate(res):
        assert br.coefficient(2 - m, m) == -r


def test_quantum_candidate_commutes():
    cand = IntegralCandidate(X_DIR, G_QUANTUM)
    assert cand.operator() == quantum_x()
    assert commutator_residual(V_QUANTUM, cand).is_zero()
    assert cand.phase().substitute_hbar_zero() == classical_x()


# -- compatibility conditions -------------------------------------------------------

Vf = sp.Function("V")(x, y)
F = [sp.Function(f"f{i}")(x, y) for i in range(1, 6)]


def _generic_third_order():
    f1, f2, f3, f4 = F[:4]
    V = Vf
    R1 = 3 * f1 * D(V, x) + f2 * D(V, y)
    R2 = f3 * D(V, x) + 3 * f4 * D(V, y)
    R3 = 2 * (f2 * D(V, x) + f3 * D(V, y))
    return sp.expand(D(R1, y, 2) + D(R2, x, 2) - D(R3, x, y))


def _transcribed_third_order(corrected):
    f1, f2, f3, f4 = F[:4]
    V = Vf
    first = -f3 * D(V, x, 3) if corrected else -f3 * D(V, x)
    vxx = 2 * (D(f2, y) - D(f3, x)) if corrected else 2 * (D(f2, y) - D(f3, y))
    return sp.expand(
        first + (2 * f2 - 3 * f4) * D(V, x, 2, y, 1) + (-3 * f1 + 2 * f3) * D(V, x, 1, y, 2) - f2 * D(V, y, 3)
        + vxx * D(V, x, 2) + 2 * (-3 * D(f1, y) + D(f2, x) + D(f3, y) - 3 * D(f4, x)) * D(V, x, y)
        + 2 * (-D(f2, y) + D(f3, x)) * D(V, y, 2)
        + (-3 * D(f1, y, 2) + 2 * D(f2, x, y) - D(f3, x, 2)) * D(V, x)
        + (-D(f2, y, 2) + 2 * D(f3, x, y) - 3 * D(f4, x, 2)) * D(V, y))


def test_third_order_transcribed_condition_needs_two_fixes():
    constructive = _generic_third_order()
    assert sp.expand(_transcribed_third_order(corrected=True) + constructive) == 0
    assert sp.expand(_transcribed_third_order(corrected=False) + constructive) != 0


def _monomial_potential(rng):
    return sum((parse(f"({rng.randint(-5, 5) or 1})*x^({rng.randint(-4, 4)}/{rng.choice([1, 3])})*y^{rng.randint(0, 3)}")
                for _ in range(3)), Expression())


@pytest.mark.parametrize("order", [2, 3, 4])
def test_compatibility_matches_generic_cross_derivative(order):
    rng = random.Random(order)
    V = _monomial_potential(rng)
    Vs = to_sympy(V, SYMS)
    A = sym_A(order)
    f = sympy_fpolys(order, A)
    if order == 2:
        R = [2 * f[0] * D(Vs, x) + f[1] * D(Vs, y), f[1] * D(Vs, x) + 2 * f[2] * D(Vs, y)]
        oracle = D(R[0], y) - D(R[1], x)
    elif order == 3:
        R1 = 3 * f[0] * D(Vs, x) + f[1] * D(Vs, y)
        R2 = f[2] * D(Vs, x) + 3 * f[3] * D(Vs, y)
        R3 = 2 * (f[1] * D(Vs, x) + f[2] * D(Vs, y))
        oracle = D(R1, y, 2) + D(R2, x, 2) - D(R3, x, y)
    else:
        oracle = (D(4 * f[0] * D(Vs, x) + f[1] * D(Vs, y), y, 3)
                  - D(3 * f[1] * D(Vs, x) + 2 * f[2] * D(Vs, y), x, y, 2)
                  + D(2 * f[2] * D(Vs, x) + 3 * f[3] * D(Vs, y), x, 2, y)
                  - D(f[3] * D(Vs, x) + 4 * f[4] * D(Vs, y), x, 3))
    oracle = sp.expand(oracle)
    per_unit = compatibility_expression(order, V)
    for key, sym in A.items():
        got = to_sympy(per_unit[key], SYMS)
        assert sp.simplify(got - oracle.coeff(sym)) == 0, key


def test_h_squared_compatible_for_random_polynomials():
    rng = random.Random(5)
    for _ in range(5):
        V = sum((parse(f"({rng.randint(-9, 9)})*x^{rng.randint(0, 4)}*y^{rng.randint(0, 4)}")
                 for _ in range(4)), Expression())
        assert compatibility_at(4, V, H2_DIR).is_zero(), V
        assert compatibility_at(4, V, hamiltonian_power_leading(4)).is_zero()


def test_x_direction_compatible_with_potential():
    assert compatibility_at(3, V_CLASSICAL, X_DIR).is_zero()


def test_h_direction_compatible_at_order_two():
    assert compatibility_at(2, V_CLASSICAL, H_DIR).is_zero()


def test_zero_residual_candidates_are_compatible():
    cand = IntegralCandidate(X_DIR, G_CLASSICAL)
    assert all(r.is_zero() for r in linear_determining_residuals(3, V_CLASSICAL, cand))
    assert compatibility_at(3, V_CLASSICAL, cand.A).is_zero()


# -- admissible spaces ----------------------------------------------------------------

def test_order_two_null_space_is_hamiltonian():
    space = solve_admissible_A(2, V_CLASSICAL)
    assert space.basis == [H_DIR]


def test_order_three_contains_x_direction():
    space = solve_admissible_A(3, V_CLASSICAL)
    assert space.contains(X_DIR)


def test_order_four_contains_y_and_h_squared():
    space = solve_admissible_A(4, V_CLASSICAL)
    assert space.contains(Y_DIR) and space.contains(H2_DIR)


@pytest.mark.parametrize("order, V", [(2, V_CLASSICAL), (3, V_CLASSICAL), (4, V_CLASSICAL),
                                      (3, V_QUANTUM), (4, parse("y*x^(-2/3) + 4*x^(4/3) + 3*y^2*x^(-2/3)"))])
def test_solver_round_trip(order, V):
    space = solve_admissible_A(order, V)
    for b in space.basis:
        assert compatibility_at(order, V, b).is_zero()
    assert space.rank + space.dimension == space.unknowns


def test_solver_rejects_bad_order():
    with pytest.raises(ValueError):
        solve_admissible_A(5, V_CLASSICAL)


def test_admissible_report_is_labelled_necessary():
    assert solve_admissible_A(2, V_CLASSICAL).to_dict()["verdict"] == "necessary-condition"


# -- full closure ---------------------------------------------------------------------

def test_closure_recovers_classical_x():
    res = close_integrals(3, V_CLASSICAL)
    assert res.basis == [X_DIR]
    w = res.witnesses[0]
    assert commutator_residual(V_CLASSICAL, w, quantum=False).is_zero()


def test_closure_recovers_quantum_corrections():
    res = close_integrals(3, V_QUANTUM)
    assert res.quantum and res.basis == [X_DIR]
    w = res.witnesses[0]
    assert commutator_residual(V_QUANTUM, w).is_zero()
    assert w.operator() == quantum_x()


def test_closure_order_four_finds_y_and_h_squared():
    res = close_integrals(4, V_CLASSICAL)
    assert res.dimension == 2
    assert res.contains(Y_DIR) and res.contains(H2_DIR)
    for w in res.witnesses:
        assert commutator_residual(V_CLASSICAL, w, quantum=False).is_zero()


def test_closure_perturbed_exponent_empty():
    assert close_integrals(3, parse("alpha*y*x^(-1/2)")).dimension == 0


# -- zeroth-order (nonlinear) component -------------------------------------------------

def _generic_zeroth_order():
    """[H, X] applied to 1 for a generic potential and generic g functions."""
    g1, g2 = sp.Function("g1")(x, y), sp.Function("g2")(x, y)
    A = sym_A(3)
    I = sp.I

    def p1(u):
        return -I * hbar * D(u, x)

    def p2(u):
        return -I * hbar * D(u, y)

    def power(op, n, u):
        for _ in range(n):
            u = op(u)
        return u

    def L3(u):
        return x * p2(u) - y * p1(u)

    def Xop(u):
        tot = 0
        for (j, k, l), a in A.items():
            P = lambda w, k=k, l=l: power(p1, k, power(p2, l, w))
            tot += a * (power(L3, j, P(u)) + P(power(L3, j, u))) / 2
        return tot + (g1 * p1(u) + p1(g1 * u)) / 2 + (g2 * p2(u) + p2(g2 * u)) / 2

    def Hop(u):
        return -hbar ** 2 / 2 * (D(u, x, 2) + D(u, y, 2)) + Vf * u

    one = sp.Integer(1)
    return sp.expand(Hop(Xop(one)) - Xop(Hop(one))), A, g1, g2


def test_zeroth_order_component_matches_generic_oracle():
    generic, A, g1, g2 = _generic_zeroth_order()
    V = V_QUANTUM
    cand = IntegralCandidate(ACoeffs.from_labels(3, A021=3, A003=2, A111=1), (parse("x^2*y"), parse("x^(1/3)")))
    subs = {a: 0 for a in A.values()}
    subs.update({A[(0, 2, 1)]: 3, A[(0, 0, 3)]: 2, A[(1, 1, 1)]: 1})
    oracle = generic.subs(subs).subs({Vf: to_sympy(V, SYMS), g1: x ** 2 * y, g2: x ** sp.Rational(1, 3)}).doit()
    got = to_sympy(nonlinear_residual(V, cand), SYMS)
    assert sp.simplify(got - oracle) == 0


def test_zeroth_order_component_vanishes_for_quantum_x():
    assert nonlinear_residual(V_QUANTUM, IntegralCandidate(X_DIR, G_QUANTUM)).is_zero()


def test_transcribed_nonlinear_equation_holds_only_with_flipped_sign():
    generic, A, g1, g2 = _generic_zeroth_order()
    Vx, Vy = D(Vf, x), D(Vf, y)
    f1, f2, f3, f4 = sympy_fpolys(3, A)
    bracket = (f1 * D(Vf, x, 3) + f2 * D(Vf, x, 2, y, 1) + f3 * D(Vf, x, 1, y, 2) + f4 * D(Vf, y, 3)
               + 4 * A[(3, 0, 0)] * (x * Vy - y * Vx) + 2 * A[(2, 0, 1)] * Vx + 2 * A[(2, 0, 1)] * Vy)
    subs = {a: 0 for a in A.values()}
    subs.update({A[(0, 2, 1)]: 3, A[(0, 0, 3)]: 2})
    point = {Vf: to_sympy(V_QUANTUM, SYMS), g1: to_sympy(G_QUANTUM[0], SYMS), g2: to_sympy(G_QUANTUM[1], SYMS)}

    def at(e):
        return sp.simplify(e.subs(subs).subs(point).doit())

    assert at(generic) == 0
    assert at(g1 * Vx + g2 * Vy + hbar ** 2 / 4 * bracket) != 0
    assert at(g1 * Vx + g2 * Vy - hbar ** 2 / 4 * bracket) == 0


@pytest.mark.slow
def test_fourth_order_ell_equation_has_only_hbar_squared_corrections():
    g1, g2, g3, ell = (sp.Function(n)(x, y) for n in ("g1", "g2", "g3", "ell"))
    A = sym_A(4)
    I = sp.I

    def p(u, v):
        return -I * hbar * D(u, v)

    def power(v, n, u):
        for _ in range(n):
            u = p(u, v)
        return u

    def L3(u):
        return x * p(u, y) - y * p(u, x)

    def Lpow(j, u):
        for _ in range(j):
            u = L3(u)
        return u

    def sym(g, k, l, u):
        return (g * power(x, k, power(y, l, u)) + power(x, k, power(y, l, g * u))) / 2

    def Yop(u):
        tot = 0
        for (j, k, l), a in A.items():
            tot += a * (Lpow(j, power(x, k, power(y, l, u))) + power(x, k, power(y, l, Lpow(j, u)))) / 2
        return tot + sym(g1, 2, 0, u) + sym(g2, 1, 1, u) + sym(g3, 0, 2, u) + ell * u

    def Hop(u):
        return -hbar ** 2 / 2 * (D(u, x, 2) + D(u, y, 2)) + Vf * u

    def C(u):
        return Hop(Yop(u)) - Yop(Hop(u))

    first = sp.expand(C(x) - x * C(sp.Integer(1)))  # coefficient of d/dx
    q = sp.expand(first / first.coeff(D(ell, x)))
    powers = {sp.degree(t, hbar) for t in sp.Add.make_args(q)}
    assert powers == {0, 2}
    assert sp.expand(q.coeff(hbar, 0) - (D(ell, x) - 2 * g1 * D(Vf, x) - g2 * D(Vf, y))) == 0


def test_quantum_leading_term_is_self_adjoint():
    from superint.weylop import adjoint
    for key in a_keys(4):
        op = expand_leading_quantum(ACoeffs.unit(4, key))
        assert adjoint(op) == op


def test_integral_candidate_shapes():
    with pytest.raises(ValueError):
        IntegralCandidate(X_DIR, (parse("x"),))
    c = IntegralCandidate(H_DIR, (parse("x"),))
    assert c.g == (parse("x"),)
    assert c.phase() == parse_phase("p1^2 + p2^2 + x")
    assert IntegralCandidate(Y_DIR).g == (Expression(),) * 3
