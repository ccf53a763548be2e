"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails (the failing
check ids are printed to stderr), 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .detsys import close_integrals, solve_admissible_A
from .dynamics import TrajectorySpec, integrate
from .models import SCHEMA_VERSION, DrachParams, VerificationReport, drach_suite, verify_all
from .phasepoly import PhasePoint, parse_phase, poisson_bracket
from .symexpr import ExpressionError, parse
from .weylop import commutator, parse_operator


class UsageError(Exception):
    """Bad flag values that argparse itself cannot detect."""


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text",
                        help="output format (default: text)")
    common.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    common.add_argument("--timing", action="store_true",
                        help="append a separate timing section (makes output non-deterministic)")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--alpha", type=_rational, default=None,
                        help="substitute a rational value for alpha (default: keep symbolic)")
    params.add_argument("--hbar", type=_rational, default=None,
                        help="substitute a rational value for hbar (default: keep symbolic)")

    p = argparse.ArgumentParser(prog="superint", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("verify-all", parents=[common],
                   help="run the theorem, algebra, rank, limit and necessity suites")

    b = sub.add_parser("bracket", parents=[common, params], help="exact Poisson bracket {A, B}")
    b.add_argument("a")
    b.add_argument("b")

    c = sub.add_parser("commutator", parents=[common, params], help="exact operator commutator [A, B]")
    c.add_argument("a")
    c.add_argument("b")

    d = sub.add_parser("detsolve", parents=[common],
                       help="admissible leading terms for a potential")
    d.add_argument("--potential", required=True, help='potential, e.g. "alpha*y*x^(-2/3)"')
    d.add_argument("--order", type=int, choices=(2, 3, 4), required=True)
    d.add_argument("--closure", action="store_true",
                   help="also solve the full bracket system over a monomial ansatz")

    r = sub.add_parser("drach", parents=[common], help="Drach-family suite for a+b*y+c*(4x^2+3y^2)")
    r.add_argument("--a", type=_rational, default=Fraction(0))
    r.add_argument("--b", type=_rational, default=Fraction(1))
    r.add_argument("--c", type=_rational, default=Fraction(0))

    s = sub.add_parser("simulate", parents=[common], help="RK4 trajectory with drift monitors, CSV out")
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--x0", type=float, default=1.0)
    s.add_argument("--y0", type=float, default=0.0)
    s.add_argument("--p10", type=float, default=0.0)
    s.add_argument("--p20", type=float, default=1.0)
    s.add_argument("--tend", type=float, default=5.0)
    s.add_argument("--dt", type=_positive_float, default=1e-4)
    s.add_argument("--max-drift", type=_positive_float, default=None,
                   help="fail (exit 1) if any monitor's relative drift exceeds this")
    s.add_argument("--backend", choices=("cython", "python"), default=None)
    return p


def _subst(obj, alpha, hbar):
    if alpha is None and hbar is None:
        return obj
    return obj.map_coefficients(lambda e: e.substitute(alpha, hbar))


def _doc(command: str, **fields) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, **fields}


def _render(doc: dict, text: str, fmt: str) -> str:
    return json.dumps(doc, indent=2) + "\n" if fmt == "json" else text + "\n"


def _cmd_verify_all(args) -> tuple[str, list[str]]:
    reports = verify_all()
    failed = [c.id for r in reports for c in r.failures()]
    doc = _doc("verify-all", ok=not failed, reports=[r.to_dict(args.timing) for r in reports])
    text = "\n\n".join(r.to_text(args.timing) for r in reports)
    text += "\n\nALL PASS" if not failed else f"\n\nFAILED: {', '.join(failed)}"
    return _render(doc, text, args.format), failed


def _cmd_bracket(args) -> tuple[str, list[str]]:
    res = _subst(poisson_bracket(parse_phase(args.a), parse_phase(args.b)), args.alpha, args.hbar)
    doc = _doc("bracket", a=args.a, b=args.b, convention="{x,p1}=1", result=str(res))
    return _render(doc, str(res), args.format), []


def _cmd_commutator(args) -> tuple[str, list[str]]:
    res = _subst(commutator(parse_operator(args.a), parse_operator(args.b)), args.alpha, args.hbar)
    doc = _doc("commutator", a=args.a, b=args.b, normal_ordered=res.normal_ordered_str(),
               symmetric=res.symmetric_str())
    text = f"normal-ordered: {res.normal_ordered_str()}\nsymmetric:      {res.symmetric_str()}"
    return _render(doc, text, args.format), []


def _cmd_detsolve(args) -> tuple[str, list[str]]:
    V = parse(args.potential)
    space = solve_admissible_A(args.order, V)
    doc = _doc("detsolve", admissible=space.to_dict())
    lines = [f"order {space.order}, potential {space.potential}",
             f"linear compatibility: {space.equations} equations, rank {space.rank}, "
             f"null space dimension {space.dimension} (necessary condition)"]
    lines += [f"  {b}" for b in space.basis] or ["  (empty)"]
    if args.closure:
        closed = close_integrals(args.order, V)
        doc["closure"] = closed.to_dict()
        lines.append(f"full bracket system: dimension {closed.dimension} (exact within ansatz)")
        lines += [f"  {b}" for b in closed.basis] or ["  (empty)"]
    return _render(doc, "\n".join(lines), args.format), []


def _report_output(name: str, report: VerificationReport, args) -> tuple[str, list[str]]:
    failed = [c.id for c in report.failures()]
    doc = _doc(name, **report.to_dict(args.timing))
    return _render(doc, report.to_text(args.timing), args.format), failed


def _cmd_drach(args) -> tuple[str, list[str]]:
    return _report_output("drach", drach_suite(DrachParams(args.a, args.b, args.c)), args)


def _cmd_simulate(args) -> tuple[str, list[str]]:
    try:
        spec = TrajectorySpec(PhasePoint(args.x0, args.y0, args.p10, args.p20), alpha=args.alpha,
                              t_end=args.tend, dt=args.dt)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rec = integrate(spec, backend=args.backend)
    failed = []
    if rec.status != "ok":
        failed.append(f"simulate.status ({rec.status} after {rec.steps} steps)")
    if args.max_drift is not None:
        failed += [f"simulate.drift.{n} ({d:.3e} > {args.max_drift:.3e})"
                   for n, d in rec.max_relative_drift.items() if d > args.max_drift]
    if args.format == "json":
        doc = _doc("simulate", status=rec.status, steps=rec.steps,
                   max_relative_drift={n: float(f"{d:.17g}") for n, d in rec.max_relative_drift.items()},
                   csv=rec.to_csv())
        return json.dumps(doc, indent=2) + "\n", failed
    return rec.to_csv(), failed


COMMANDS = {
    "verify-all": _cmd_verify_all,
    "bracket": _cmd_bracket,
    "commutator": _cmd_commutator,
    "detsolve": _cmd_detsolve,
    "drach": _cmd_drach,
    "simulate": _cmd_simulate,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        output, failed = COMMANDS[args.command](args)
    except (ExpressionError, UsageError) as exc:
        print(f"superint {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(output)
    else:
        sys.stdout.write(output)
    if failed:
        for cid in failed:
            print(f"FAILED check: {cid}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
