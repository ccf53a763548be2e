"""Pure-Python twin of ``_kernels.pyx``; same signatures and semantics.

Arithmetic is carried out on ``numpy.longdouble`` scalars so both backends
share the extended-precision round-off floor.
"""
from __future__ import annotations

import numpy as np

LD = np.longdouble
_ONE = LD(1)
_ZERO = LD(0)


def _eval(t, lo, hi, x, y, p1, p2):
    acc = _ZERO
    for r in range(lo, hi):
        c, ex, ey, k, l = t[r]
        v = c
        if ex:
            v = v * x ** ex
        if ey:
            v = v * y ** ey
        if k:
            v = v * p1 ** int(k)
        if l:
            v = v * p2 ** int(l)
        acc = acc + v
    return acc


def _rows(table):
    return [tuple(LD(v) for v in row) for row in np.asarray(table, dtype=LD)]


def eval_table(table, x, y, p1, p2):
    rows = _rows(table)
    return _eval(rows, 0, len(rows), LD(x), LD(y), LD(p1), LD(p2))


def rk4_run(rhs, rhs_off, mon, mon_off, state, dt, nsteps, stride, x_min, out):
    rhs_rows = _rows(rhs)
    mon_rows = _rows(mon)
    roff = [int(v) for v in rhs_off]
    moff = [int(v) for v in mon_off]
    nmon = len(moff) - 1
    dt = LD(dt)
    x_min = LD(x_min)
    s = [LD(v) for v in state]
    comp = [_ZERO] * 4
    h2, h6 = dt / 2, dt / 6
    two = LD(2)

    def f(u):
        return [_eval(rhs_rows, roff[i], roff[i + 1], u[0], u[1], u[2], u[3]) for i in range(4)]

    def sample(row, t):
        out[row, 0] = t
        out[row, 1:5] = s
        for j in range(nmon):
            out[row, 5 + j] = _eval(mon_rows, moff[j], moff[j + 1], s[0], s[1], s[2], s[3])

    row = 0
    sample(row, _ZERO)
    row += 1
    status = 0
    n = 0
    with np.errstate(all="ignore"):
        while n < nsteps:
            k1 = f(s)
            u2 = [s[i] + h2 * k1[i] for i in range(4)]
            k2 = f(u2)
            u3 = [s[i] + h2 * k2[i] for i in range(4)]
            k3 = f(u3)
            u4 = [s[i] + dt * k3[i] for i in range(4)]
            k4 = f(u4)
            lowest = min(u2[0], u3[0], u4[0])
            for i in range(4):
                inc = h6 * (k1[i] + two * k2[i] + two * k3[i] + k4[i]) - comp[i]
                t0 = s[i] + inc
                comp[i] = (t0 - s[i]) - inc
                s[i] = t0
            n += 1
            if lowest <= x_min or s[0] <= x_min:
                status = 1
                break
            if not all(np.isfinite(v) for v in s):
                status = 2
                break
            if n % stride == 0 or n == nsteps:
                sample(row, n * dt)
                row += 1
        if status:
            sample(row, n * dt)
            row += 1
    state[:] = s
    return row, status, n
