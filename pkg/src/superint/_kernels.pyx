# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: monomial-table evaluation and fixed-step RK4.

A monomial table has rows ``(c, ex, ey, k, l)`` meaning
``c * x**ex * y**ey * p1**k * p2**l``.  Several tables are packed into one
array and addressed through an offsets array of length ``ntables + 1``.

Everything runs in C ``long double``.  On x86-64 that is the 80-bit extended
format, whose round-off sits far below RK4 truncation error at the step sizes
used for conservation studies.
"""
from libc.math cimport powl, isfinite


cdef inline long double _ipow(long double b, int n) nogil:
    cdef long double r = 1.0
    while n > 0:
        if n & 1:
            r *= b
        b *= b
        n >>= 1
    return r


cdef inline long double _eval(const long double[:, ::1] t, Py_ssize_t lo, Py_ssize_t hi,
                              long double x, long double y, long double p1, long double p2) nogil:
    cdef long double acc = 0.0, v
    cdef Py_ssize_t r
    for r in range(lo, hi):
        v = t[r, 0]
        if t[r, 1] != 0.0:
            v *= powl(x, t[r, 1])
        if t[r, 2] != 0.0:
            v *= powl(y, t[r, 2])
        if t[r, 3] != 0.0:
            v *= _ipow(p1, <int>t[r, 3])
        if t[r, 4] != 0.0:
            v *= _ipow(p2, <int>t[r, 4])
        acc += v
    return acc


def eval_table(const long double[:, ::1] table, long double x, long double y,
               long double p1, long double p2):
    return _eval(table, 0, table.shape[0], x, y, p1, p2)


cdef inline void _rhs(const long double[:, ::1] t, const Py_ssize_t[::1] off,
                      long double* s, long double* out) nogil:
    cdef int i
    for i in range(4):
        out[i] = _eval(t, off[i], off[i + 1], s[0], s[1], s[2], s[3])


cdef inline void _sample(long double[:, ::1] out, Py_ssize_t row, long double t, long double* s,
                         const long double[:, ::1] mon, const Py_ssize_t[::1] moff,
                         Py_ssize_t nmon) nogil:
    cdef Py_ssize_t j
    out[row, 0] = t
    for j in range(4):
        out[row, 1 + j] = s[j]
    for j in range(nmon):
        out[row, 5 + j] = _eval(mon, moff[j], moff[j + 1], s[0], s[1], s[2], s[3])


def rk4_run(const long double[:, ::1] rhs, const Py_ssize_t[::1] rhs_off,
            const long double[:, ::1] mon, const Py_ssize_t[::1] mon_off,
            long double[::1] state, long double dt, long nsteps, long stride, long double x_min,
            long double[:, ::1] out):
    """Integrate in place; returns ``(rows_written, status, steps_taken)``.

    status: 0 finished, 1 domain exit (x <= x_min at the new state or at any
    stage argument), 2 non-finite state inside the domain.
    Samples are written at step 0, every ``stride`` steps and at the end.
    """
    cdef long double s[4]
    cdef long double k1[4]
    cdef long double k2[4]
    cdef long double k3[4]
    cdef long double k4[4]
    cdef long double tmp[4]
    cdef long double comp[4]
    cdef long double inc
    cdef long double t0
    cdef long double lowest
    cdef Py_ssize_t nmon = mon_off.shape[0] - 1
    cdef Py_ssize_t row = 0
    cdef long n
    cdef int i, status = 0
    cdef long double h6 = dt / 6.0, h2 = dt / 2.0
    for i in range(4):
        s[i] = state[i]
        comp[i] = 0.0
    with nogil:
        _sample(out, row, 0.0, s, mon, mon_off, nmon)
        row += 1
        n = 0
        while n < nsteps:
            _rhs(rhs, rhs_off, s, k1)
            for i in range(4):
                tmp[i] = s[i] + h2 * k1[i]
            lowest = tmp[0]
            _rhs(rhs, rhs_off, tmp, k2)
            for i in range(4):
                tmp[i] = s[i] + h2 * k2[i]
            if tmp[0] < lowest:
                lowest = tmp[0]
            _rhs(rhs, rhs_off, tmp, k3)
            for i in range(4):
                tmp[i] = s[i] + dt * k3[i]
            if tmp[0] < lowest:
                lowest = tmp[0]
            _rhs(rhs, rhs_off, tmp, k4)
            for i in range(4):
                # compensated (Kahan) accumulation of the state
                inc = h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) - comp[i]
                t0 = s[i] + inc
                comp[i] = (t0 - s[i]) - inc
                s[i] = t0
            n += 1
            # a stage outside the domain usually surfaces as NaN, so test it first
            if lowest <= x_min or s[0] <= x_min:
                status = 1
                break
            if not (isfinite(s[0]) and isfinite(s[1]) and isfinite(s[2]) and isfinite(s[3])):
                status = 2
                break
            if n % stride == 0 or n == nsteps:
                _sample(out, row, n * dt, s, mon, mon_off, nmon)
                row += 1
        if status != 0:
            _sample(out, row, n * dt, s, mon, mon_off, nmon)
            row += 1
    for i in range(4):
        state[i] = s[i]
    return row, status, n
