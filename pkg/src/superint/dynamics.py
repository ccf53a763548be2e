"""Classical flow of the nonseparable Hamiltonian with conservation-drift monitoring."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .models import classical_x, classical_y, V_CLASSICAL
from .detsys import hamiltonian_phase
from .phasepoly import PhasePoint, PhasePolynomial

DRIFT_FLOOR = 1e-12
LD = np.longdouble


def _ld(q: Fraction | int) -> np.longdouble:
    q = Fraction(q)
    return LD(q.numerator) / LD(q.denominator)


def compile_table(poly: PhasePolynomial, alpha: float, hbar: float = 0.0) -> np.ndarray:
    """Monomial table ``(c, ex, ey, k, l)`` in long double, alpha and hbar folded into ``c``.

    Rational coefficients and exponents are rounded once, directly to the
    extended format, so the compiled monitors stay conserved by the compiled
    flow to extended precision.
    """
    rows = []
    a, h = LD(alpha), LD(hbar)
    for (k, l), coeff in poly.items():
        for key, c in coeff.items():
            if c.im:
                raise ValueError("cannot compile a complex coefficient for a real flow")
            val = _ld(c.re) * a ** key.alpha * h ** key.hbar
            if val:
                rows.append((val, _ld(key.x), _ld(key.y), LD(k), LD(l)))
    return np.array(rows, dtype=LD).reshape(-1, 5)


def pack_tables(tables: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(tables) + 1, dtype=np.intp)
    offsets[1:] = np.cumsum([t.shape[0] for t in tables])
    packed = np.vstack(tables) if tables else np.zeros((0, 5))
    return np.ascontiguousarray(packed, dtype=LD), offsets


def hamiltonian_vector_field(H: PhasePolynomial) -> list[PhasePolynomial]:
    """``(dH/dp1, dH/dp2, -dH/dx, -dH/dy)``."""
    return [H.diff("p1"), H.diff("p2"), -H.diff("x"), -H.diff("y")]


def system_monitors() -> dict[str, PhasePolynomial]:
    return {"H": hamiltonian_phase(V_CLASSICAL), "X": classical_x(), "Y": classical_y()}


@dataclass
class TrajectorySpec:
    initial: PhasePoint
    alpha: float = 1.0
    t_end: float = 5.0
    dt: float = 1e-4
    monitors: dict[str, PhasePolynomial] = field(default_factory=system_monitors)
    hamiltonian: PhasePolynomial | None = None
    sample_stride: int | None = None  # default: one sample per sample_interval
    x_min: float = 1e-6
    sample_interval: float = 0.01

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if not self.initial.x > 0:
            raise ValueError("initial x must be positive")
        if self.sample_stride is None:
            self.sample_stride = max(1, int(round(self.sample_interval / self.dt)))
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.hamiltonian is None:
            self.hamiltonian = hamiltonian_phase(V_CLASSICAL)


@dataclass
class DriftRecord:
    times: np.ndarray
    states: np.ndarray  # columns x, y, p1, p2
    values: dict[str, np.ndarray]
    max_relative_drift: dict[str, float]
    status: str  # "ok" | "domain-exit" | "nonfinite"
    steps: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(self.values)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "p1", "p2", *names])
        for i, t in enumerate(self.times):
            row = [t, *self.states[i], *(self.values[n][i] for n in names)]
            w.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()


def relative_drift(values: np.ndarray) -> float:
    """Max ``|Q(t) - Q(0)| / |Q(0)|``; absolute drift when ``|Q(0)|`` is tiny."""
    values = np.asarray(values)
    ref = values[0]
    dev = np.max(np.abs(values - ref))
    if abs(ref) < DRIFT_FLOOR:
        return float(dev)
    return float(dev / abs(ref))


def integrate(spec: TrajectorySpec, backend: str | None = None) -> DriftRecord:
    """Fixed-step RK4 of Hamilton's equations generated from ``spec.hamiltonian``."""
    impl = kernels.backend(backend) if backend else kernels
    field_tables = [compile_table(p, spec.alpha) for p in hamiltonian_vector_field(spec.hamiltonian)]
    rhs, rhs_off = pack_tables(field_tables)
    names = list(spec.monitors)
    mon, mon_off = pack_tables([compile_table(spec.monitors[n], spec.alpha) for n in names])
    nsteps = int(round(spec.t_end / spec.dt))
    stride = spec.sample_stride
    out = np.zeros((nsteps // stride + 3, 5 + len(names)), dtype=LD)
    p = spec.initial
    state = np.array([p.x, p.y, p.p1, p.p2], dtype=LD)
    rows, status, steps = impl.rk4_run(rhs, rhs_off, mon, mon_off, state, LD(spec.dt),
                                       nsteps, stride, LD(spec.x_min), out)
    out = out[:rows]
    # drift is taken before narrowing to float64
    drift = {n: relative_drift(out[:, 5 + j]) for j, n in enumerate(names)}
    wide = out.astype(float)
    values = {n: wide[:, 5 + j].copy() for j, n in enumerate(names)}
    status_name = {0: "ok", 1: "domain-exit", 2: "nonfinite"}[status]
    return DriftRecord(wide[:, 0].copy(), wide[:, 1:5].copy(), values, drift, status_name, steps)


def final_point(record: DriftRecord) -> PhasePoint:
    x, y, p1, p2 = record.states[-1]
    return PhasePoint(float(x), float(y), float(p1), float(p2))


def time_reversal_error(spec: TrajectorySpec, backend: str | None = None) -> float:
    """Integrate forward, flip momenta, integrate again; distance to the start."""
    fwd = integrate(spec, backend)
    end = final_point(fwd)
    back_spec = TrajectorySpec(PhasePoint(end.x, end.y, -end.p1, -end.p2), spec.alpha, spec.t_end,
                               spec.dt, spec.monitors, spec.hamiltonian, spec.sample_stride, spec.x_min,
                               spec.sample_interval)
    back = integrate(back_spec, backend)
    x, y, p1, p2 = back.states[-1]
    p = spec.initial
    return math.sqrt((x - p.x) ** 2 + (y - p.y) ** 2 + (-p1 - p.p1) ** 2 + (-p2 - p.p2) ** 2)
