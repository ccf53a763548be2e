"""Compiled vs pure-Python kernels on the RK4 flow and monomial-table evaluation.

Usage: python benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from superint import kernels
from superint.dynamics import (LD, TrajectorySpec, compile_table, hamiltonian_vector_field, integrate,
                               pack_tables, system_monitors)
from superint.phasepoly import PhasePoint


def _best(fn, repeat: int) -> tuple[float, float]:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000, help="RK4 steps per run")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    try:
        kernels.backend("cython")
        backends = ["cython", "python"]
    except ImportError:
        print("compiled kernel not built; timing the pure-Python backend only")
        backends = ["python"]

    dt = 1e-4
    spec = TrajectorySpec(PhasePoint(1, 0, 0, 1), t_end=args.steps * dt, dt=dt)
    table = compile_table(system_monitors()["Y"], 1.0)
    point = (1.3, 0.2, -0.4, 0.9)
    n_eval = 20000

    rhs, rhs_off = pack_tables([compile_table(p, 1.0) for p in hamiltonian_vector_field(spec.hamiltonian)])
    mon, mon_off = pack_tables([compile_table(p, 1.0) for p in spec.monitors.values()])
    stride = spec.sample_stride

    def rk4(mod):
        out = np.zeros((args.steps // stride + 3, 5 + len(spec.monitors)), dtype=LD)
        state = np.array([1, 0, 0, 1], dtype=LD)
        mod.rk4_run(rhs, rhs_off, mon, mon_off, state, LD(dt), args.steps, stride, LD(1e-6), out)

    rows = []
    finals = {}
    for name in backends:
        mod = kernels.backend(name)
        finals[name] = integrate(spec, backend=name).states[-1]
        rk_best, rk_med = _best(lambda: rk4(mod), args.repeat)

        def evals():
            for _ in range(n_eval):
                mod.eval_table(table, *point)

        ev_best, ev_med = _best(evals, args.repeat)
        rows.append((name, rk_best, rk_med, ev_best / n_eval * 1e6, ev_med / n_eval * 1e6))

    print(f"RK4: {args.steps} steps of the nonseparable flow; eval_table: quartic integral, {n_eval} calls")
    print(f"{'backend':8s} {'rk4 best s':>11s} {'rk4 med s':>10s} {'eval best us':>13s} {'eval med us':>12s}")
    for name, a, b, c, d in rows:
        print(f"{name:8s} {a:11.4f} {b:10.4f} {c:13.3f} {d:12.3f}")
    if len(rows) == 2:
        print(f"speedup rk4 x{rows[1][1] / rows[0][1]:.1f}, eval_table x{rows[1][3] / rows[0][3]:.1f}")
        diff = float(np.max(np.abs(finals["cython"] - finals["python"])))
        print(f"max |final state difference| between backends: {diff:.3e}")


if __name__ == "__main__":
    main()
